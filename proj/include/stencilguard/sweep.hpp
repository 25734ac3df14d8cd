#pragma once

#include <algorithm>
#include <cstring>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "stencilguard/boundary.hpp"
#include "stencilguard/error.hpp"
#include "stencilguard/fault.hpp"
#include "stencilguard/grid.hpp"
#include "stencilguard/kernel_spec.hpp"
#include "stencilguard/stencil.hpp"

namespace stencilguard {

namespace detail {

// One weighted read from a source layer; src == nullptr marks a layer that is
// entirely ghost (vertical neighbor beyond a ZeroGhost/ConstantGhost boundary).
template <typename T>
struct ResolvedTerm {
  const T* src = nullptr;
  int di = 0;
  int dj = 0;
  T w = T{0};
};

// Rows per checksum block. Each row keeps its own accumulator, so the order
// within a row stays x-ascending while the block exposes independent chains.
inline constexpr std::size_t kRowBlock = 8;

template <typename T>
inline T read_column(const T* row, std::ptrdiff_t x, std::ptrdiff_t nx, const BoundaryCondition& bc,
                     T ghost) {
  const GhostResolution r = resolve(x, nx, bc);
  return r.in_domain ? row[r.index] : ghost;
}

// Writes row y of the update: out[x] = C[x,y] + sum_p w_p * u(x+di_p, y+dj_p),
// accumulated term by term in stencil order.
template <typename T>
void compute_row(std::size_t nx_u, std::size_t ny_u, std::size_t y, const BoundaryCondition& bc,
                 T ghost, std::span<const ResolvedTerm<T>> terms, const ConstantField<T>& c,
                 T* __restrict out) {
  const auto nx = static_cast<std::ptrdiff_t>(nx_u);
  const auto ny = static_cast<std::ptrdiff_t>(ny_u);
  if (const T* c_row = c.row_ptr(y)) {
    for (std::ptrdiff_t x = 0; x < nx; ++x) out[x] = c_row[x];
  } else {
    const T cu = c.uniform_value();
    for (std::ptrdiff_t x = 0; x < nx; ++x) out[x] = cu;
  }
  for (const ResolvedTerm<T>& t : terms) {
    const T w = t.w;
    GhostResolution ry{false, 0, 0.0};
    if (t.src) ry = resolve(static_cast<std::ptrdiff_t>(y) + t.dj, ny, bc);
    if (!ry.in_domain) {
      const T g = w * ghost;
      for (std::ptrdiff_t x = 0; x < nx; ++x) out[x] += g;
      continue;
    }
    const T* __restrict r = t.src + ry.index * nx;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -t.di);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(nx, nx - t.di);
    for (std::ptrdiff_t x = 0; x < lo; ++x) out[x] += w * read_column(r, x + t.di, nx, bc, ghost);
    const T* __restrict rs = r + t.di;
    for (std::ptrdiff_t x = lo; x < hi; ++x) out[x] += w * rs[x];
    for (std::ptrdiff_t x = std::max(lo, hi); x < nx; ++x)
      out[x] += w * read_column(r, x + t.di, nx, bc, ghost);
  }
}

// 16-byte lanes for the blocked row sums: lane r of an accumulator holds the
// running sum of row r. Columns are transposed into lanes in registers, so
// every row is still summed x-ascending and the result matches a scalar loop.
template <typename V>
inline V load_vec(const void* p) {
  V v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

// Adds columns [0, nx_vec) of the next 16 / sizeof(T) rows into acc_out,
// one lane per row.
inline void add_columns(const float* rows, std::size_t nx, std::size_t nx_vec, float* acc_out) {
  typedef float v4 __attribute__((vector_size(16)));
  typedef int m4 __attribute__((vector_size(16)));
  v4 acc = load_vec<v4>(acc_out);
  const float* r0 = rows;
  const float* r1 = rows + nx;
  const float* r2 = rows + 2 * nx;
  const float* r3 = rows + 3 * nx;
  for (std::size_t x = 0; x < nx_vec; x += 4) {
    const v4 a = load_vec<v4>(r0 + x), b = load_vec<v4>(r1 + x);
    const v4 c = load_vec<v4>(r2 + x), d = load_vec<v4>(r3 + x);
#if defined(__clang__)
    const v4 t0 = __builtin_shufflevector(a, b, 0, 4, 1, 5), t1 = __builtin_shufflevector(a, b, 2, 6, 3, 7);
    const v4 t2 = __builtin_shufflevector(c, d, 0, 4, 1, 5), t3 = __builtin_shufflevector(c, d, 2, 6, 3, 7);
    acc += __builtin_shufflevector(t0, t2, 0, 1, 4, 5);
    acc += __builtin_shufflevector(t0, t2, 2, 3, 6, 7);
    acc += __builtin_shufflevector(t1, t3, 0, 1, 4, 5);
    acc += __builtin_shufflevector(t1, t3, 2, 3, 6, 7);
#else
    const v4 t0 = __builtin_shuffle(a, b, m4{0, 4, 1, 5}), t1 = __builtin_shuffle(a, b, m4{2, 6, 3, 7});
    const v4 t2 = __builtin_shuffle(c, d, m4{0, 4, 1, 5}), t3 = __builtin_shuffle(c, d, m4{2, 6, 3, 7});
    acc += __builtin_shuffle(t0, t2, m4{0, 1, 4, 5});
    acc += __builtin_shuffle(t0, t2, m4{2, 3, 6, 7});
    acc += __builtin_shuffle(t1, t3, m4{0, 1, 4, 5});
    acc += __builtin_shuffle(t1, t3, m4{2, 3, 6, 7});
#endif
  }
  std::memcpy(acc_out, &acc, sizeof acc);
}

inline void add_columns(const double* rows, std::size_t nx, std::size_t nx_vec, double* acc_out) {
  typedef double v2 __attribute__((vector_size(16)));
  typedef long long m2 __attribute__((vector_size(16)));
  v2 acc = load_vec<v2>(acc_out);
  const double* r0 = rows;
  const double* r1 = rows + nx;
  for (std::size_t x = 0; x < nx_vec; x += 2) {
    const v2 a = load_vec<v2>(r0 + x), b = load_vec<v2>(r1 + x);
#if defined(__clang__)
    acc += __builtin_shufflevector(a, b, 0, 2);
    acc += __builtin_shufflevector(a, b, 1, 3);
#else
    acc += __builtin_shuffle(a, b, m2{0, 2});
    acc += __builtin_shuffle(a, b, m2{1, 3});
#endif
  }
  std::memcpy(acc_out, &acc, sizeof acc);
}

// bins[r] = sum_x rows[r][x], x ascending, for `count` consecutive rows.
template <typename T>
void accumulate_row_sums(const T* rows, std::size_t nx, std::size_t count, T* bins) {
  constexpr std::size_t lanes = 16 / sizeof(T);
  const std::size_t nx_vec = nx - nx % lanes;
  std::size_t r = 0;
  for (; r + lanes <= count; r += lanes) {
    T acc[lanes] = {};
    add_columns(rows + r * nx, nx, nx_vec, acc);
    for (std::size_t l = 0; l < lanes; ++l) {
      const T* row = rows + (r + l) * nx;
      for (std::size_t x = nx_vec; x < nx; ++x) acc[l] += row[x];
      bins[r + l] = acc[l];
    }
  }
  for (; r < count; ++r) {
    T acc = T{0};
    const T* row = rows + r * nx;
    for (std::size_t x = 0; x < nx; ++x) acc += row[x];
    bins[r] = acc;
  }
}

// Sweeps rows [y0, y1) of one layer. When bins is non-null, bins[y] receives
// the row sum of the stored (possibly faulted) values.
template <typename T>
void sweep_layer_block(std::size_t nx, std::size_t ny, std::size_t y0, std::size_t y1,
                       const BoundaryCondition& bc, T ghost, std::span<const ResolvedTerm<T>> terms,
                       const ConstantField<T>& c, T* out, T* bins, const ActiveFault* fault) {
  for (std::size_t y = y0; y < y1; ++y) compute_row(nx, ny, y, bc, ghost, terms, c, out + y * nx);
  if (fault && fault->target == FaultTarget::Domain && fault->y >= y0 && fault->y < y1) {
    T& cell = out[fault->y * nx + fault->x];
    cell = flip_bit(cell, fault->bit);
  }
  if (bins) accumulate_row_sums(out + y0 * nx, nx, y1 - y0, bins + y0);
  if (bins && fault && fault->target == FaultTarget::Checksum && fault->y >= y0 && fault->y < y1)
    bins[fault->y] = flip_bit(bins[fault->y], fault->bit);
}

template <typename T>
std::vector<ResolvedTerm<T>> in_layer_terms(const Stencil& stencil, const T* src) {
  std::vector<ResolvedTerm<T>> terms;
  terms.reserve(stencil.size() + 2);
  for (const StencilPoint& p : stencil.points())
    terms.push_back({src, p.di, p.dj, static_cast<T>(p.w)});
  return terms;
}

inline int thread_count(int requested) { return requested < 1 ? 1 : requested; }

template <typename T>
void check_constant_dims(const ConstantField<T>& c, std::size_t nx, std::size_t ny) {
  if (c.nx() != nx || c.ny() != ny) throw DimensionMismatch("constant field dims differ from grid dims");
}

template <typename T>
void sweep_2d(const Grid2D<T>& in, Grid2D<T>& out, const Stencil& stencil, const ConstantField<T>& c,
              const BoundaryCondition& bc, T* bins, const ActiveFault* fault, int threads) {
  stencil.check_fits(in.nx(), in.ny());
  check_constant_dims(c, in.nx(), in.ny());
  if (!out.same_shape(in)) out = Grid2D<T>(in.nx(), in.ny());
  const auto terms = in_layer_terms<T>(stencil, in.data());
  const T ghost = static_cast<T>(bc.ghost_value());
  const std::size_t nx = in.nx(), ny = in.ny();
  const std::ptrdiff_t blocks = static_cast<std::ptrdiff_t>((ny + kRowBlock - 1) / kRowBlock);
  T* dst = out.data();
#pragma omp parallel for schedule(static) num_threads(thread_count(threads)) if (threads > 1)
  for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
    const std::size_t y0 = static_cast<std::size_t>(blk) * kRowBlock;
    const std::size_t y1 = std::min(ny, y0 + kRowBlock);
    sweep_layer_block<T>(nx, ny, y0, y1, bc, ghost, terms, c, dst, bins, fault);
  }
  out.set_iteration(in.iteration() + 1);
}

}  // namespace detail

/// One Jacobi sweep of a 2D grid; the input is left untouched and the result
/// carries iteration + 1. Rows are independent, so any thread count gives
/// bitwise-identical output.
template <typename T>
Grid2D<T> sweep(const Grid2D<T>& grid, const Stencil& stencil, const ConstantField<T>& c,
                const BoundaryCondition& bc, int threads = 1) {
  Grid2D<T> out(grid.nx(), grid.ny());
  detail::sweep_2d<T>(grid, out, stencil, c, bc, nullptr, nullptr, threads);
  return out;
}

template <typename T>
Grid2D<T> sweep(const Grid2D<T>& grid, const Stencil& stencil, const BoundaryCondition& bc) {
  return sweep(grid, stencil, ConstantField<T>::zero(grid.nx(), grid.ny()), bc);
}

// Precomputed per-layer update for a tile: resolved sources for every layer,
// constant fields in the element type.
template <typename T>
class TileSweeper {
 public:
  TileSweeper(const KernelSpec& kernel, const TileDims& dims, int threads = 1)
      : kernel_(kernel), dims_(dims), threads_(threads) {
    kernel_.stencil.check_fits(dims.nx, dims.ny);
    if (dims.nz == 0) throw DimensionMismatch("tile needs at least one layer");
    ghost_ = static_cast<T>(kernel_.bc.ghost_value());
    constants_.reserve(dims.nz);
    for (std::size_t z = 0; z < dims.nz; ++z) {
      if (!kernel_.constant) {
        constants_.push_back(ConstantField<T>::zero(dims.nx, dims.ny));
        continue;
      }
      Grid2D<T> c(dims.nx, dims.ny);
      for (std::size_t y = 0; y < dims.ny; ++y)
        for (std::size_t x = 0; x < dims.nx; ++x) c.at(x, y) = static_cast<T>(kernel_.constant(x, y, z));
      constants_.push_back(ConstantField<T>::per_cell(std::move(c)));
    }
  }

  const KernelSpec& kernel() const { return kernel_; }
  const TileDims& dims() const { return dims_; }
  int threads() const { return threads_; }
  void set_threads(int threads) { threads_ = threads; }
  const ConstantField<T>& constant(std::size_t z) const { return constants_[z]; }

  // Terms for layer z reading from `in`: in-layer points first, then the
  // layer above, then the layer below. Zero vertical weights add no term.
  std::vector<detail::ResolvedTerm<T>> terms_for(const Tile3D<T>& in, std::size_t z) const {
    auto terms = detail::in_layer_terms<T>(kernel_.stencil, in.layer(z).data());
    const auto nz = static_cast<std::ptrdiff_t>(in.nz());
    auto vertical = [&](std::ptrdiff_t dz, double w) {
      if (w == 0.0) return;
      const GhostResolution r = resolve(static_cast<std::ptrdiff_t>(z) + dz, nz, kernel_.bc);
      const T* src = r.in_domain ? in.layer(static_cast<std::size_t>(r.index)).data() : nullptr;
      terms.push_back({src, 0, 0, static_cast<T>(w)});
    };
    vertical(+1, kernel_.w_top);
    vertical(-1, kernel_.w_bottom);
    return terms;
  }

  /// out = one sweep of in. With `bins` (one vector per layer) the row
  /// checksums b of the stored output are produced in the same pass.
  void run(const Tile3D<T>& in, Tile3D<T>& out, std::vector<std::vector<T>>* bins,
           const ActiveFault* fault) const {
    check(in);
    if (out.nx() != in.nx() || out.ny() != in.ny() || out.nz() != in.nz())
      out = Tile3D<T>(in.nx(), in.ny(), in.nz());
    if (bins) {
      bins->resize(in.nz());
      for (auto& b : *bins) b.resize(in.ny());
    }
    const std::size_t nx = in.nx(), ny = in.ny(), nz = in.nz();
    std::vector<std::vector<detail::ResolvedTerm<T>>> terms(nz);
    for (std::size_t z = 0; z < nz; ++z) terms[z] = terms_for(in, z);

    const std::size_t blocks = (ny + detail::kRowBlock - 1) / detail::kRowBlock;
    const auto work = static_cast<std::ptrdiff_t>(blocks * nz);
#pragma omp parallel for schedule(static) num_threads(detail::thread_count(threads_)) if (threads_ > 1)
    for (std::ptrdiff_t item = 0; item < work; ++item) {
      const std::size_t z = static_cast<std::size_t>(item) / blocks;
      const std::size_t y0 = (static_cast<std::size_t>(item) % blocks) * detail::kRowBlock;
      const std::size_t y1 = std::min(ny, y0 + detail::kRowBlock);
      const ActiveFault* f = (fault && fault->z == z) ? fault : nullptr;
      T* layer_bins = bins ? (*bins)[z].data() : nullptr;
      detail::sweep_layer_block<T>(nx, ny, y0, y1, kernel_.bc, ghost_, terms[z], constants_[z],
                                   out.layer(z).data(), layer_bins, f);
    }
    out.set_iteration(in.iteration() + 1);
  }

 private:
  void check(const Tile3D<T>& in) const {
    if (in.nx() != dims_.nx || in.ny() != dims_.ny || in.nz() != dims_.nz)
      throw DimensionMismatch("tile dims differ from the sweeper's dims");
  }

  KernelSpec kernel_;
  TileDims dims_;
  int threads_ = 1;
  T ghost_ = T{0};
  std::vector<ConstantField<T>> constants_;
};

/// One Jacobi sweep of every layer of a tile: all reads at t, all writes to t+1.
template <typename T>
Tile3D<T> sweep_tile(const Tile3D<T>& tile, const KernelSpec& kernel, int threads = 1) {
  TileSweeper<T> sweeper(kernel, TileDims{tile.nx(), tile.ny(), tile.nz()}, threads);
  Tile3D<T> out(tile.nx(), tile.ny(), tile.nz());
  sweeper.run(tile, out, nullptr, nullptr);
  return out;
}

/// The kernel's default initial state for the given dims.
template <typename T>
Tile3D<T> initial_tile(const KernelSpec& kernel, const TileDims& dims) {
  Tile3D<T> tile(dims.nx, dims.ny, dims.nz, T{1});
  if (!kernel.initial) return tile;
  for (std::size_t z = 0; z < dims.nz; ++z)
    for (std::size_t y = 0; y < dims.ny; ++y)
      for (std::size_t x = 0; x < dims.nx; ++x) tile.at(x, y, z) = static_cast<T>(kernel.initial(x, y, z));
  return tile;
}

}  // namespace stencilguard
