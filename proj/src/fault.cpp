#include "stencilguard/fault.hpp"

namespace stencilguard {

FaultSpec schedule_random_fault(std::uint64_t seed, const TileDims& dims, std::int64_t max_iteration,
                                int element_width) {
  return schedule_random_fault(seed, dims, max_iteration, 0, element_width - 1);
}

FaultSpec schedule_random_fault(std::uint64_t seed, const TileDims& dims, std::int64_t max_iteration, int bit_lo,
                                int bit_hi) {
  if (max_iteration < 1) throw InvalidParams("max_iteration must be >= 1");
  if (dims.cells() == 0) throw InvalidParams("fault dims must be non-empty");
  if (bit_lo < 0 || bit_hi < bit_lo || bit_hi > 63)
    throw BitOutOfRange("bit range [" + std::to_string(bit_lo) + ", " + std::to_string(bit_hi) + "] is invalid");
  SplitMix64 rng(seed);
  FaultSpec f;
  f.iteration = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_iteration)));
  f.z = static_cast<std::size_t>(rng.below(dims.nz));
  f.y = static_cast<std::size_t>(rng.below(dims.ny));
  f.x = static_cast<std::size_t>(rng.below(dims.nx));
  f.bit = bit_lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(bit_hi - bit_lo + 1)));
  f.armed = true;
  return f;
}

std::string to_string(FaultTarget t) { return t == FaultTarget::Domain ? "domain" : "checksum"; }

}  // namespace stencilguard
