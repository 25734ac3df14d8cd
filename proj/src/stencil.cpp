#include "stencilguard/stencil.hpp"

#include <algorithm>
#include <cstdlib>

#include "stencilguard/error.hpp"

namespace stencilguard {

Stencil::Stencil(std::string name, std::vector<StencilPoint> points)
    : name_(std::move(name)), points_(std::move(points)) {
  if (points_.empty()) throw InvalidParams("stencil '" + name_ + "' has no points");
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = i + 1; j < points_.size(); ++j)
      if (points_[i].di == points_[j].di && points_[i].dj == points_[j].dj)
        throw InvalidParams("stencil '" + name_ + "' repeats offset (" + std::to_string(points_[i].di) + ", " +
                            std::to_string(points_[i].dj) + ")");
}

int Stencil::max_abs_di() const {
  int m = 0;
  for (const auto& p : points_) m = std::max(m, std::abs(p.di));
  return m;
}

int Stencil::max_abs_dj() const {
  int m = 0;
  for (const auto& p : points_) m = std::max(m, std::abs(p.dj));
  return m;
}

double Stencil::weight_sum() const {
  double s = 0.0;
  for (const auto& p : points_) s += p.w;
  return s;
}

void Stencil::check_fits(std::size_t nx, std::size_t ny) const {
  if (nx == 0 || ny == 0) throw DimensionMismatch("grid dimensions must be >= 1");
  if (static_cast<std::size_t>(max_abs_di()) > nx - 1 || static_cast<std::size_t>(max_abs_dj()) > ny - 1)
    throw DimensionMismatch("stencil '" + name_ + "' reaches further than a " + std::to_string(nx) + "x" +
                            std::to_string(ny) + " grid");
}

double Stencil::weight_at(int di, int dj) const {
  for (const auto& p : points_)
    if (p.di == di && p.dj == dj) return p.w;
  return 0.0;
}

}  // namespace stencilguard
