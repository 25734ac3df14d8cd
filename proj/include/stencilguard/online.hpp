#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stencilguard/boundary.hpp"
#include "stencilguard/checksum.hpp"
#include "stencilguard/error.hpp"
#include "stencilguard/grid.hpp"
#include "stencilguard/kernel_spec.hpp"
#include "stencilguard/stencil.hpp"
#include "stencilguard/sweep.hpp"

namespace stencilguard {

// Which boundary terms a (stencil, bc) pair makes nonzero. alpha corrects the
// a (per-x) interpolation for y offsets, beta the b (per-y) interpolation for
// x offsets.
struct LedgerNeeds {
  bool alpha = false;
  bool beta = false;

  bool any() const { return alpha || beta; }
};

// Periodic never needs terms. BounceBack needs none when every offset along
// the summed axis is within +-1 and mirrored with equal weight, since the
// clamped reads then cancel. Ghost boundaries need them for any offset.
LedgerNeeds ledger_needs(const Stencil& stencil, const BoundaryCondition& bc);

// Border sums of the iteration-t grid feeding the interpolation to t+1.
//   alpha[j][x] = (sum of ghost reads of column x past the edge) - (sum of the
//                 |j| in-domain rows the shifted window no longer covers)
//   beta[i][y]  = the same along x for row y.
template <typename T>
struct BoundaryLedger {
  LedgerNeeds needs;
  std::vector<std::pair<int, std::vector<T>>> alpha;
  std::vector<std::pair<int, std::vector<T>>> beta;
  std::int64_t iteration = 0;

  const std::vector<T>* alpha_for(int j) const { return find(alpha, j); }
  const std::vector<T>* beta_for(int i) const { return find(beta, i); }
  bool empty() const { return alpha.empty() && beta.empty(); }

 private:
  static const std::vector<T>* find(const std::vector<std::pair<int, std::vector<T>>>& v, int key) {
    for (const auto& [k, vec] : v)
      if (k == key) return &vec;
    return nullptr;
  }
};

namespace detail {

inline std::vector<int> distinct_nonzero(const Stencil& s, bool use_dj) {
  std::vector<int> out;
  for (const auto& p : s.points()) {
    const int v = use_dj ? p.dj : p.di;
    if (v != 0 && std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Boundary term for one line of `len` cells read through `get(k)`, shifted by
// `off` along the line.
template <typename T, typename Get>
T boundary_term(Get&& get, std::ptrdiff_t len, int off, const BoundaryCondition& bc) {
  const T count = static_cast<T>(off < 0 ? -off : off);
  T ghost = T{0};
  T border = T{0};
  if (off > 0) {
    for (std::ptrdiff_t k = 0; k < off; ++k) border += get(k);
    if (bc.kind == BoundaryKind::BounceBack) ghost = count * get(len - 1);
  } else {
    for (std::ptrdiff_t k = len + off; k < len; ++k) border += get(k);
    if (bc.kind == BoundaryKind::BounceBack) ghost = count * get(0);
  }
  if (bc.kind == BoundaryKind::ConstantGhost) ghost = count * static_cast<T>(bc.ghost);
  return ghost - border;
}

}  // namespace detail

/// Records the border sums of `grid` (iteration t) that the interpolation to
/// t+1 needs. BOnly records beta only; Both records alpha and beta. Returns an
/// empty ledger when the stencil/bc pair needs no terms.
template <typename T>
BoundaryLedger<T> record_boundary_ledger(const Grid2D<T>& grid, const Stencil& stencil,
                                         const BoundaryCondition& bc,
                                         ChecksumKind which = ChecksumKind::Both) {
  BoundaryLedger<T> ledger;
  ledger.needs = ledger_needs(stencil, bc);
  ledger.iteration = grid.iteration();
  const auto nx = static_cast<std::ptrdiff_t>(grid.nx());
  const auto ny = static_cast<std::ptrdiff_t>(grid.ny());
  if (ledger.needs.alpha && which == ChecksumKind::Both) {
    for (int j : detail::distinct_nonzero(stencil, true)) {
      std::vector<T> col(grid.nx());
      for (std::ptrdiff_t x = 0; x < nx; ++x)
        col[x] = detail::boundary_term<T>([&](std::ptrdiff_t y) { return grid.at(x, y); }, ny, j, bc);
      ledger.alpha.emplace_back(j, std::move(col));
    }
  }
  if (ledger.needs.beta) {
    for (int i : detail::distinct_nonzero(stencil, false)) {
      std::vector<T> row(grid.ny());
      for (std::ptrdiff_t y = 0; y < ny; ++y)
        row[y] = detail::boundary_term<T>([&](std::ptrdiff_t x) { return grid.at(x, y); }, nx, i, bc);
      ledger.beta.emplace_back(i, std::move(row));
    }
  }
  return ledger;
}

// Contribution of a vertically adjacent layer to a checksum interpolation.
// cs == nullptr marks a ghost layer whose checksum entries all equal ghost_sum.
template <typename T>
struct VerticalTerm {
  T w = T{0};
  const std::vector<T>* cs = nullptr;
  T ghost_sum = T{0};
};

namespace detail {

// out[k] = sums[k] + sum_p w_p * (cs[k + along_p] + term_p[k + along_p])
//          + sum_v w_v * vertical_v[k]
// with out-of-range k + along_p resolved by the 1D boundary policy; a ghost
// index stands for a full line of ghost cells.
template <typename T>
std::vector<T> interpolate_axis(std::span<const T> cs, std::span<const T> sums, const Stencil& stencil,
                                bool along_dj, std::size_t across_extent, bool with_terms,
                                const std::vector<std::pair<int, std::vector<T>>>& terms,
                                const BoundaryCondition& bc, std::span<const VerticalTerm<T>> vertical) {
  const std::size_t n = cs.size();
  if (sums.size() != n) throw LengthMismatch("constant sums length differs from checksum length");
  struct Plan {
    T w;
    int along;
    const std::vector<T>* term;
  };
  std::vector<Plan> plan;
  plan.reserve(stencil.size());
  for (const StencilPoint& p : stencil.points()) {
    const int along = along_dj ? p.dj : p.di;
    const int across = along_dj ? p.di : p.dj;
    const std::vector<T>* term = nullptr;
    if (with_terms && across != 0) {
      for (const auto& [k, vec] : terms)
        if (k == across) term = &vec;
      if (!term || term->size() != n)
        throw MissingLedger(std::string("boundary ledger lacks the ") + (along_dj ? "beta" : "alpha") +
                            " term for offset " + std::to_string(across));
    }
    plan.push_back({static_cast<T>(p.w), along, term});
  }
  const T ghost_sum = static_cast<T>(static_cast<double>(across_extent) * bc.ghost_value());
  const auto len = static_cast<std::ptrdiff_t>(n);
  std::vector<T> out(n);
  for (std::ptrdiff_t k = 0; k < len; ++k) {
    T acc = sums[k];
    for (const Plan& p : plan) {
      const GhostResolution r = resolve(k + p.along, len, bc);
      T v;
      if (r.in_domain) {
        v = cs[r.index];
        if (p.term) v = v + (*p.term)[r.index];
      } else {
        v = ghost_sum;
      }
      acc += p.w * v;
    }
    for (const VerticalTerm<T>& vt : vertical) acc += vt.w * (vt.cs ? (*vt.cs)[k] : vt.ghost_sum);
    out[k] = acc;
  }
  return out;
}

}  // namespace detail

/// Interpolated b at t+1 from b at t: the stencil applied along y to the
/// checksum vector, plus row sums of C and the beta terms.
template <typename T>
std::vector<T> interpolate_b(std::span<const T> b, const Stencil& stencil, std::span<const T> c_y,
                             std::size_t nx, const BoundaryLedger<T>& ledger, const BoundaryCondition& bc,
                             std::span<const VerticalTerm<T>> vertical = {}) {
  const LedgerNeeds needs = ledger_needs(stencil, bc);
  return detail::interpolate_axis<T>(b, c_y, stencil, true, nx, needs.beta, ledger.beta, bc, vertical);
}

/// Interpolated a at t+1 from a at t (stencil applied along x, alpha terms).
template <typename T>
std::vector<T> interpolate_a(std::span<const T> a, const Stencil& stencil, std::span<const T> c_x,
                             std::size_t ny, const BoundaryLedger<T>& ledger, const BoundaryCondition& bc,
                             std::span<const VerticalTerm<T>> vertical = {}) {
  const LedgerNeeds needs = ledger_needs(stencil, bc);
  return detail::interpolate_axis<T>(a, c_x, stencil, false, ny, needs.alpha, ledger.alpha, bc, vertical);
}

template <typename T>
ChecksumPair<T> interpolate_checksums(const ChecksumPair<T>& cs, const Stencil& stencil,
                                      std::span<const T> c_x, std::span<const T> c_y,
                                      const BoundaryLedger<T>& ledger, const BoundaryCondition& bc) {
  ChecksumPair<T> out;
  out.iteration = cs.iteration + 1;
  out.which = cs.which;
  out.b = interpolate_b<T>(cs.b, stencil, c_y, c_x.size(), ledger, bc);
  if (cs.has_a()) out.a = interpolate_a<T>(cs.a, stencil, c_x, c_y.size(), ledger, bc);
  return out;
}

// Below this magnitude of the direct checksum the comparison is absolute.
inline constexpr double kRelativeFloor = 1e-20;

struct Mismatch {
  std::size_t index = 0;
  double rel_error = 0.0;  // +inf when an entry is not finite
};

/// Flags i when |interp[i]/direct[i] - 1| > epsilon, when either entry is
/// not finite, or (for |direct[i]| < kRelativeFloor) when the absolute gap
/// exceeds epsilon.
template <typename T>
std::vector<Mismatch> detect(std::span<const T> direct, std::span<const T> interp, double epsilon) {
  if (direct.size() != interp.size()) throw LengthMismatch("detect: vectors differ in length");
  if (!(epsilon > 0.0)) throw InvalidParams("detect: epsilon must be > 0");
  std::vector<Mismatch> out;
  for (std::size_t i = 0; i < direct.size(); ++i) {
    const double d = static_cast<double>(direct[i]);
    const double p = static_cast<double>(interp[i]);
    if (!std::isfinite(d) || !std::isfinite(p)) {
      out.push_back({i, std::numeric_limits<double>::infinity()});
      continue;
    }
    const double rel = std::abs(d) < kRelativeFloor ? std::abs(p - d) : std::abs(p / d - 1.0);
    if (rel > epsilon) out.push_back({i, rel});
  }
  return out;
}

/// Largest relative gap between two checksum vectors, same definition as detect().
template <typename T>
double max_relative_gap(std::span<const T> direct, std::span<const T> interp) {
  if (direct.size() != interp.size()) throw LengthMismatch("vectors differ in length");
  double worst = 0.0;
  for (std::size_t i = 0; i < direct.size(); ++i) {
    const double d = static_cast<double>(direct[i]);
    const double p = static_cast<double>(interp[i]);
    if (!std::isfinite(d) || !std::isfinite(p)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(d) < kRelativeFloor ? std::abs(p - d) : std::abs(p / d - 1.0));
  }
  return worst;
}

struct DetectionReport {
  std::vector<Mismatch> err_x;  // indices into a
  std::vector<Mismatch> err_y;  // indices into b
  bool any_nonfinite = false;

  bool clean() const { return err_x.empty() && err_y.empty(); }
};

inline DetectionReport make_report(std::vector<Mismatch> err_x, std::vector<Mismatch> err_y) {
  DetectionReport r{std::move(err_x), std::move(err_y), false};
  for (const auto& m : r.err_x) r.any_nonfinite |= std::isinf(m.rel_error);
  for (const auto& m : r.err_y) r.any_nonfinite |= std::isinf(m.rel_error);
  return r;
}

struct CorrectionRecord {
  std::size_t z = 0;
  std::size_t ex = 0;
  std::size_t ey = 0;
  double observed = 0.0;
  double corrected = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  bool consistent = false;
  bool recomputed = false;  // a reconstruction fell back to summing the line without the cell
};

namespace detail {

template <typename T>
struct Reconstruction {
  T value = T{0};
  bool recomputed = false;
};

// interp - (direct - u). When the subtraction would cancel catastrophically
// (u larger than the whole expected line sum, or anything non-finite) the
// rest of the line is summed afresh instead.
template <typename T, typename Get>
Reconstruction<T> reconstruct(T interp, T direct, T u, std::size_t len, std::size_t skip, Get&& get) {
  const T v = interp - (direct - u);
  if (std::isfinite(v) && std::isfinite(direct) && std::isfinite(u) && std::abs(u) <= std::abs(interp))
    return {v, false};
  T rest = T{0};
  for (std::size_t k = 0; k < len; ++k)
    if (k != skip) rest += get(k);
  return {interp - rest, true};
}

}  // namespace detail

/// Localizes and repairs corrupted cells from mismatching a/b indices.
/// Each flagged x is paired with the unused flagged y whose two
/// reconstructions agree best; the pair is accepted when
/// |vx - vy| <= epsilon * max(|vx|, |vy|, |a'[ex]|, |b'[ey]|, 1). The cell
/// gets (vx + vy) / 2 and both direct checksums are moved by the change.
/// Throws Uncorrectable when counts differ, a pairing is inconsistent, or a
/// reconstruction is not finite. Nothing is modified on throw.
template <typename T>
std::vector<CorrectionRecord> locate_and_correct(Grid2D<T>& grid, std::vector<T>& a, std::vector<T>& b,
                                                 std::span<const T> a_interp, std::span<const T> b_interp,
                                                 const DetectionReport& report, double epsilon,
                                                 std::size_t z = 0) {
  const std::size_t m = report.err_x.size();
  if (m == 0 || report.err_y.size() != m)
    throw Uncorrectable("cannot localize: " + std::to_string(report.err_x.size()) + " x mismatches vs " +
                        std::to_string(report.err_y.size()) + " y mismatches");
  if (a.size() != grid.nx() || b.size() != grid.ny() || a_interp.size() != a.size() ||
      b_interp.size() != b.size())
    throw LengthMismatch("checksum lengths do not match the grid");

  struct Pair {
    std::size_t ex, ey;
    detail::Reconstruction<T> vx, vy;
  };
  std::vector<Pair> pairs;
  std::vector<bool> used(m, false);
  for (const Mismatch& mx : report.err_x) {
    const std::size_t ex = mx.index;
    std::optional<Pair> best;
    double best_gap = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (used[k]) continue;
      const std::size_t ey = report.err_y[k].index;
      const T u = grid.at(ex, ey);
      auto vx = detail::reconstruct<T>(a_interp[ex], a[ex], u, grid.ny(), ey,
                                       [&](std::size_t y) { return grid.at(ex, y); });
      auto vy = detail::reconstruct<T>(b_interp[ey], b[ey], u, grid.nx(), ex,
                                       [&](std::size_t x) { return grid.at(x, ey); });
      if (!std::isfinite(vx.value) || !std::isfinite(vy.value)) continue;
      const double gap = std::abs(static_cast<double>(vx.value) - static_cast<double>(vy.value));
      const double scale = std::max({std::abs(static_cast<double>(vx.value)), std::abs(static_cast<double>(vy.value)),
                                     std::abs(static_cast<double>(a_interp[ex])),
                                     std::abs(static_cast<double>(b_interp[ey])), 1.0});
      if (gap <= epsilon * scale && gap < best_gap) {
        best_gap = gap;
        best = Pair{ex, ey, vx, vy};
        best_k = k;
      }
    }
    if (!best)
      throw Uncorrectable("no consistent reconstruction for column x=" + std::to_string(ex));
    used[best_k] = true;
    pairs.push_back(*best);
  }

  std::vector<CorrectionRecord> records;
  records.reserve(pairs.size());
  for (const Pair& p : pairs) {
    T& cell = grid.at(p.ex, p.ey);
    const T observed = cell;
    const T corrected = (p.vx.value + p.vy.value) / T{2};
    cell = corrected;
    const bool recomputed = p.vx.recomputed || p.vy.recomputed;
    if (!recomputed && std::isfinite(observed)) {
      a[p.ex] += corrected - observed;
      b[p.ey] += corrected - observed;
    } else {
      T col = T{0};
      for (std::size_t y = 0; y < grid.ny(); ++y) col += grid.at(p.ex, y);
      T row = T{0};
      for (std::size_t x = 0; x < grid.nx(); ++x) row += grid.at(x, p.ey);
      a[p.ex] = col;
      b[p.ey] = row;
    }
    records.push_back({z, p.ex, p.ey, static_cast<double>(observed), static_cast<double>(corrected),
                       static_cast<double>(p.vx.value), static_cast<double>(p.vy.value), true, recomputed});
  }
  return records;
}

struct AbftOptions {
  double epsilon = 1e-5;
  int threads = 1;
};

struct StepReport {
  std::int64_t iteration = 0;  // iteration produced by the step
  bool detected = false;
  std::vector<std::size_t> flagged_layers;
  std::vector<CorrectionRecord> records;
  std::size_t checksum_repairs = 0;
  bool uncorrectable = false;
  std::string message;
};

namespace detail {

// Vertical coupling of layer z expressed on per-layer checksum vectors.
template <typename T>
std::vector<VerticalTerm<T>> vertical_terms(const KernelSpec& kernel, std::size_t z, std::size_t nz,
                                            const std::vector<std::vector<T>>& per_layer, T ghost_sum) {
  std::vector<VerticalTerm<T>> out;
  auto add = [&](std::ptrdiff_t dz, double w) {
    if (w == 0.0) return;
    const GhostResolution r =
        resolve(static_cast<std::ptrdiff_t>(z) + dz, static_cast<std::ptrdiff_t>(nz), kernel.bc);
    if (r.in_domain)
      out.push_back({static_cast<T>(w), &per_layer[static_cast<std::size_t>(r.index)], T{0}});
    else
      out.push_back({static_cast<T>(w), nullptr, ghost_sum});
  };
  add(+1, kernel.w_top);
  add(-1, kernel.w_bottom);
  return out;
}

template <typename T>
T ghost_line_sum(const BoundaryCondition& bc, std::size_t len) {
  return static_cast<T>(static_cast<double>(len) * bc.ghost_value());
}

}  // namespace detail

/// Per-iteration protection of a tile: fused sweep and b accumulation,
/// interpolation of b, detection on b, and on a mismatch lazy computation of
/// a/a', localization and in-place correction. Each layer carries its own
/// checksums.
template <typename T>
class OnlineAbft {
 public:
  OnlineAbft(const KernelSpec& kernel, Tile3D<T> initial, AbftOptions opts = {})
      : sweeper_(kernel, TileDims{initial.nx(), initial.ny(), initial.nz()}, opts.threads),
        opts_(opts),
        needs_(ledger_needs(kernel.stencil, kernel.bc)),
        cur_(std::move(initial)),
        next_(cur_.nx(), cur_.ny(), cur_.nz()) {
    if (!(opts_.epsilon > 0.0)) throw InvalidParams("epsilon must be > 0");
    b_cur_.resize(cur_.nz());
    for (std::size_t z = 0; z < cur_.nz(); ++z) b_cur_[z] = compute_checksums(cur_.layer(z), ChecksumKind::BOnly).b;
  }

  const Tile3D<T>& tile() const { return cur_; }
  const std::vector<std::vector<T>>& b() const { return b_cur_; }
  const TileSweeper<T>& sweeper() const { return sweeper_; }
  std::int64_t iteration() const { return cur_.iteration(); }

  StepReport step(const ActiveFault* fault = nullptr) {
    const KernelSpec& k = sweeper_.kernel();
    const std::size_t nx = cur_.nx(), nz = cur_.nz();

    std::vector<BoundaryLedger<T>> ledgers(nz);
    if (needs_.beta)
      for (std::size_t z = 0; z < nz; ++z)
        ledgers[z] = record_boundary_ledger(cur_.layer(z), k.stencil, k.bc, ChecksumKind::BOnly);

    sweeper_.run(cur_, next_, &b_next_, fault);

    StepReport report;
    report.iteration = next_.iteration();
    const T ghost_b = detail::ghost_line_sum<T>(k.bc, nx);
    std::vector<std::vector<T>> b_interp(nz);
    std::vector<std::vector<Mismatch>> flags(nz);
    for (std::size_t z = 0; z < nz; ++z) {
      const auto vert = detail::vertical_terms<T>(k, z, nz, b_cur_, ghost_b);
      b_interp[z] = interpolate_b<T>(b_cur_[z], k.stencil, sweeper_.constant(z).row_sums(), nx, ledgers[z],
                                     k.bc, vert);
      flags[z] = detect<T>(b_next_[z], b_interp[z], opts_.epsilon);
      if (!flags[z].empty()) report.flagged_layers.push_back(z);
    }

    if (!report.flagged_layers.empty()) {
      report.detected = true;
      correct_layers(report, b_interp, flags);
    }

    std::swap(cur_, next_);
    std::swap(b_cur_, b_next_);
    return report;
  }

 private:
  void correct_layers(StepReport& report, const std::vector<std::vector<T>>& b_interp,
                      const std::vector<std::vector<Mismatch>>& flags) {
    const KernelSpec& k = sweeper_.kernel();
    const std::size_t ny = cur_.ny(), nz = cur_.nz();
    std::vector<std::vector<T>> a_cur(nz);
    std::vector<bool> have_a(nz, false);
    auto ensure_a = [&](std::size_t z) {
      if (!have_a[z]) {
        a_cur[z] = compute_column_checksum(cur_.layer(z));
        have_a[z] = true;
      }
    };
    const T ghost_a = detail::ghost_line_sum<T>(k.bc, ny);

    for (std::size_t z : report.flagged_layers) {
      ensure_a(z);
      const auto vert = detail::vertical_terms<T>(k, z, nz, a_cur, ghost_a);
      for (const auto& vt : vert)
        if (vt.cs) ensure_a(static_cast<std::size_t>(vt.cs - a_cur.data()));
      BoundaryLedger<T> ledger;
      if (needs_.alpha) ledger = record_boundary_ledger(cur_.layer(z), k.stencil, k.bc, ChecksumKind::Both);
      const std::vector<T> a_interp =
          interpolate_a<T>(a_cur[z], k.stencil, sweeper_.constant(z).column_sums(), ny, ledger, k.bc, vert);
      std::vector<T> a_next = compute_column_checksum(next_.layer(z));
      DetectionReport rep = make_report(detect<T>(a_next, a_interp, opts_.epsilon), flags[z]);

      if (rep.err_x.empty()) {
        // Data agrees with a: the b entry itself is suspect.
        std::vector<T> b_direct = compute_checksums(next_.layer(z), ChecksumKind::BOnly).b;
        if (detect<T>(b_direct, b_interp[z], opts_.epsilon).empty()) {
          b_next_[z] = std::move(b_direct);
          ++report.checksum_repairs;
        } else {
          report.uncorrectable = true;
          report.message = "layer " + std::to_string(z) + ": b mismatch without a matching a mismatch";
        }
        continue;
      }
      try {
        auto records = locate_and_correct<T>(next_.layer(z), a_next, b_next_[z], a_interp, b_interp[z], rep,
                                             opts_.epsilon, z);
        report.records.insert(report.records.end(), records.begin(), records.end());
      } catch (const Uncorrectable& e) {
        report.uncorrectable = true;
        report.message = "layer " + std::to_string(z) + ": " + e.what();
      }
    }
  }

  TileSweeper<T> sweeper_;
  AbftOptions opts_;
  LedgerNeeds needs_;
  Tile3D<T> cur_;
  Tile3D<T> next_;
  std::vector<std::vector<T>> b_cur_;
  std::vector<std::vector<T>> b_next_;
};

}  // namespace stencilguard
