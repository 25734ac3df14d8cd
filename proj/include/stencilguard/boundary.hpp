#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace stencilguard {

enum class BoundaryKind {
  BounceBack,     // out-of-range index clamps to the nearest in-domain index
  Periodic,       // index wraps modulo the extent
  ConstantGhost,  // out-of-range reads return a fixed value
  ZeroGhost,      // out-of-range reads return 0
};

struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::BounceBack;
  double ghost = 0.0;

  static BoundaryCondition bounce_back() { return {BoundaryKind::BounceBack, 0.0}; }
  static BoundaryCondition periodic() { return {BoundaryKind::Periodic, 0.0}; }
  static BoundaryCondition constant(double value) { return {BoundaryKind::ConstantGhost, value}; }
  static BoundaryCondition zero() { return {BoundaryKind::ZeroGhost, 0.0}; }

  bool has_ghost_cells() const {
    return kind == BoundaryKind::ConstantGhost || kind == BoundaryKind::ZeroGhost;
  }
  double ghost_value() const { return kind == BoundaryKind::ConstantGhost ? ghost : 0.0; }

  friend bool operator==(const BoundaryCondition&, const BoundaryCondition&) = default;
};

struct GhostResolution {
  bool in_domain = true;
  std::ptrdiff_t index = 0;  // valid when in_domain
  double value = 0.0;        // valid when !in_domain
};

/// Maps a possibly out-of-range index onto the domain [0, extent) or onto a
/// ghost value. Total for extent >= 1.
inline GhostResolution resolve(std::ptrdiff_t index, std::ptrdiff_t extent,
                               const BoundaryCondition& bc) {
  if (index >= 0 && index < extent) return {true, index, 0.0};
  switch (bc.kind) {
    case BoundaryKind::BounceBack:
      return {true, index < 0 ? 0 : extent - 1, 0.0};
    case BoundaryKind::Periodic: {
      std::ptrdiff_t r = index % extent;
      return {true, r < 0 ? r + extent : r, 0.0};
    }
    case BoundaryKind::ConstantGhost:
      return {false, 0, bc.ghost};
    case BoundaryKind::ZeroGhost:
      return {false, 0, 0.0};
  }
  return {false, 0, 0.0};
}

std::string to_string(const BoundaryCondition& bc);

// Accepts "bounceback", "periodic", "zero", "constant:<value>".
BoundaryCondition parse_boundary(std::string_view text);

}  // namespace stencilguard
