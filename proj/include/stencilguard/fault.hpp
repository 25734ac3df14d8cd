#pragma once

#include <bit>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>

#include "stencilguard/error.hpp"

namespace stencilguard {

/// Returns `value` with bit `bit` of its IEEE-754 pattern inverted.
/// Bit 0 is the least significant mantissa bit; the sign is bit 31 (binary32)
/// or bit 63 (binary64).
template <std::floating_point T>
T flip_bit(T value, int bit) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  constexpr int width = static_cast<int>(sizeof(T) * 8);
  if (bit < 0 || bit >= width)
    throw BitOutOfRange("bit " + std::to_string(bit) + " outside [0, " + std::to_string(width) + ")");
  return std::bit_cast<T>(static_cast<Bits>(std::bit_cast<Bits>(value) ^ (Bits{1} << bit)));
}

// splitmix64 (Steele, Lea, Flood 2014). Chosen because the stream is fully
// specified by the algorithm, so schedules reproduce on every platform.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased draw from [0, n) by rejection; n >= 1.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

enum class FaultTarget {
  Domain,    // flip a freshly computed cell value before it is stored
  Checksum,  // flip an entry of the freshly accumulated b checksum
};

struct FaultSpec {
  std::int64_t iteration = 0;  // index of the sweep t -> t+1 that carries the fault
  std::size_t z = 0;
  std::size_t x = 0;
  std::size_t y = 0;           // for Checksum targets: the b index
  int bit = 0;
  bool armed = true;
  FaultTarget target = FaultTarget::Domain;

  friend bool operator==(const FaultSpec&, const FaultSpec&) = default;
};

struct TileDims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 1;

  std::size_t cells() const { return nx * ny * nz; }
  friend bool operator==(const TileDims&, const TileDims&) = default;
};

/// Uniform over sweep index [0, max_iteration) x cells x bits [0, element_width).
/// Draw order is iteration, z, y, x, bit.
FaultSpec schedule_random_fault(std::uint64_t seed, const TileDims& dims, std::int64_t max_iteration,
                                int element_width);

// Same draw order, with the bit uniform over [bit_lo, bit_hi].
FaultSpec schedule_random_fault(std::uint64_t seed, const TileDims& dims, std::int64_t max_iteration, int bit_lo,
                                int bit_hi);

// The slice of a FaultSpec the sweep kernel needs for one iteration.
struct ActiveFault {
  std::size_t z = 0;
  std::size_t x = 0;
  std::size_t y = 0;
  int bit = 0;
  FaultTarget target = FaultTarget::Domain;
};

// Single-shot arming around a FaultSpec. Owned by the coordinating thread.
class FaultInjector {
 public:
  FaultInjector() = default;
  explicit FaultInjector(FaultSpec spec) : spec_(spec), armed_(spec.armed) {}

  std::optional<ActiveFault> due(std::int64_t sweep_index) const {
    if (!armed_ || !spec_ || spec_->iteration != sweep_index) return std::nullopt;
    return ActiveFault{spec_->z, spec_->x, spec_->y, spec_->bit, spec_->target};
  }

  void disarm() {
    if (armed_) fired_ = true;
    armed_ = false;
  }

  bool armed() const { return armed_; }
  bool fired() const { return fired_; }
  const std::optional<FaultSpec>& spec() const { return spec_; }

 private:
  std::optional<FaultSpec> spec_;
  bool armed_ = false;
  bool fired_ = false;
};

std::string to_string(FaultTarget t);

}  // namespace stencilguard
