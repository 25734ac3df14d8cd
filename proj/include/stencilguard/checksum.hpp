#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "stencilguard/grid.hpp"
#include "stencilguard/sweep.hpp"

namespace stencilguard {

enum class ChecksumKind { BOnly, Both };

// a[x] = sum_y u[x,y] (length nx), b[y] = sum_x u[x,y] (length ny).
template <typename T>
struct ChecksumPair {
  std::vector<T> a;
  std::vector<T> b;
  std::int64_t iteration = 0;
  ChecksumKind which = ChecksumKind::BOnly;

  bool has_a() const { return which == ChecksumKind::Both; }
};

/// Direct checksums. a[x] sums y-ascending, b[y] sums x-ascending, both in the
/// element type starting from 0.
template <typename T>
ChecksumPair<T> compute_checksums(const Grid2D<T>& grid, ChecksumKind which = ChecksumKind::Both) {
  ChecksumPair<T> cs;
  cs.iteration = grid.iteration();
  cs.which = which;
  const std::size_t nx = grid.nx(), ny = grid.ny();
  cs.b.assign(ny, T{0});
  for (std::size_t y0 = 0; y0 < ny; y0 += detail::kRowBlock) {
    const std::size_t count = std::min(detail::kRowBlock, ny - y0);
    detail::accumulate_row_sums(grid.data() + y0 * nx, nx, count, cs.b.data() + y0);
  }
  if (which == ChecksumKind::Both) {
    cs.a.assign(nx, T{0});
    for (std::size_t y = 0; y < ny; ++y) {
      const T* row = grid.row(y).data();
      for (std::size_t x = 0; x < nx; ++x) cs.a[x] += row[x];
    }
  }
  return cs;
}

template <typename T>
std::vector<T> compute_column_checksum(const Grid2D<T>& grid) {
  return compute_checksums(grid, ChecksumKind::Both).a;
}

/// Sweep plus one accumulation per output cell into b. The grid is bitwise
/// the same as sweep() on the same inputs; b is bitwise the same as
/// compute_checksums(result, BOnly).b.
template <typename T>
std::pair<Grid2D<T>, std::vector<T>> sweep_with_checksum(const Grid2D<T>& grid, const Stencil& stencil,
                                                         const ConstantField<T>& c,
                                                         const BoundaryCondition& bc,
                                                         const ActiveFault* fault = nullptr,
                                                         int threads = 1) {
  Grid2D<T> out(grid.nx(), grid.ny());
  std::vector<T> b(grid.ny(), T{0});
  detail::sweep_2d<T>(grid, out, stencil, c, bc, b.data(), fault, threads);
  return {std::move(out), std::move(b)};
}

}  // namespace stencilguard
