#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "stencilguard/boundary.hpp"
#include "stencilguard/stencil.hpp"

namespace stencilguard {

using CellFunction = std::function<double(std::size_t x, std::size_t y, std::size_t z)>;

// A complete update rule for a tile: in-layer stencil, vertical coupling to the
// layers directly above (z+1) and below (z-1) at the same (x, y), the constant
// term and a default initial state. The same boundary policy applies in x, y
// and z.
struct KernelSpec {
  std::string name;
  Stencil stencil;
  double w_top = 0.0;
  double w_bottom = 0.0;
  BoundaryCondition bc;
  CellFunction constant;  // empty: C = 0
  CellFunction initial;   // empty: 1.0 everywhere

  bool has_vertical() const { return w_top != 0.0 || w_bottom != 0.0; }
  double weight_sum() const { return stencil.weight_sum() + w_top + w_bottom; }
};

}  // namespace stencilguard
