#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace stencilguard {

struct StencilPoint {
  int di = 0;  // x offset
  int dj = 0;  // y offset
  double w = 0.0;

  friend bool operator==(const StencilPoint&, const StencilPoint&) = default;
};

// Ordered set of weighted offsets. Point order is the summation order of
// every update, so it is part of the numerical contract.
class Stencil {
 public:
  Stencil() = default;
  Stencil(std::string name, std::vector<StencilPoint> points);

  const std::string& name() const { return name_; }
  const std::vector<StencilPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

  int max_abs_di() const;
  int max_abs_dj() const;
  double weight_sum() const;

  // Throws DimensionMismatch unless |di| <= nx-1 and |dj| <= ny-1.
  void check_fits(std::size_t nx, std::size_t ny) const;

  // Weight at offset (di, dj), 0 when the offset is absent.
  double weight_at(int di, int dj) const;

 private:
  std::string name_;
  std::vector<StencilPoint> points_;
};

}  // namespace stencilguard
