#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stencilguard/checksum.hpp"
#include "stencilguard/error.hpp"
#include "stencilguard/fault.hpp"
#include "stencilguard/grid.hpp"
#include "stencilguard/grid_io.hpp"
#include "stencilguard/kernel_spec.hpp"
#include "stencilguard/online.hpp"
#include "stencilguard/sweep.hpp"

namespace stencilguard {

inline constexpr std::int64_t kDefaultDetectionPeriod = 16;
inline constexpr std::int64_t kMaxDetectionPeriod = 128;

/// Applies interpolate_checksums `delta` times, consuming ledgers[s] at step s.
template <typename T>
ChecksumPair<T> iterate_interpolation(const ChecksumPair<T>& cs, std::int64_t delta, const Stencil& stencil,
                                      std::span<const T> c_x, std::span<const T> c_y,
                                      std::span<const BoundaryLedger<T>> ledgers,
                                      const BoundaryCondition& bc) {
  if (delta < 1) throw InvalidParams("detection period must be >= 1");
  const bool need = ledger_needs(stencil, bc).any();
  if (need && ledgers.size() < static_cast<std::size_t>(delta))
    throw MissingLedger("need " + std::to_string(delta) + " ledgers, got " + std::to_string(ledgers.size()));
  static const BoundaryLedger<T> empty;
  ChecksumPair<T> cur = cs;
  for (std::int64_t s = 0; s < delta; ++s) {
    const BoundaryLedger<T>& ledger = need ? ledgers[static_cast<std::size_t>(s)] : empty;
    cur = interpolate_checksums<T>(cur, stencil, c_x, c_y, ledger, bc);
  }
  return cur;
}

// Snapshot that passed detection at `iteration`.
template <typename T>
struct Checkpoint {
  std::int64_t iteration = 0;
  Tile3D<T> tile;
  std::vector<std::vector<T>> b;
  // Per step since the checkpoint, per layer. Only kept when the stencil/bc
  // pair needs boundary terms.
  std::vector<std::vector<BoundaryLedger<T>>> ledger_history;
};

enum class BlockOutcome { Clean, Mismatch };

struct LayerMismatch {
  std::size_t z = 0;
  Mismatch where;
};

struct DetectionOutcome {
  BlockOutcome outcome = BlockOutcome::Clean;
  std::int64_t iteration = 0;  // iteration at which the comparison ran
  std::vector<LayerMismatch> mismatches;
};

struct BlockResult {
  DetectionOutcome first;     // detection on the first execution of the block
  bool rolled_back = false;
};

struct OfflineOptions {
  double epsilon = 1e-5;
  std::int64_t delta = kDefaultDetectionPeriod;
  int threads = 1;
  std::optional<std::filesystem::path> spill_dir;  // write every checkpoint here
};

struct OfflineStats {
  std::int64_t detection_points = 0;
  std::int64_t mismatches = 0;
  std::int64_t rollbacks = 0;
};

/// Detection every `delta` iterations against the delta-fold interpolation
/// of the last checkpoint's checksums; rollback and recompute on mismatch.
template <typename T>
class OfflineAbft {
 public:
  OfflineAbft(const KernelSpec& kernel, Tile3D<T> initial, OfflineOptions opts = {})
      : sweeper_(kernel, TileDims{initial.nx(), initial.ny(), initial.nz()}, opts.threads),
        opts_(std::move(opts)),
        needs_(ledger_needs(kernel.stencil, kernel.bc)),
        cur_(std::move(initial)),
        next_(cur_.nx(), cur_.ny(), cur_.nz()) {
    if (!(opts_.epsilon > 0.0)) throw InvalidParams("epsilon must be > 0");
    if (opts_.delta < 1 || opts_.delta > kMaxDetectionPeriod)
      throw InvalidParams("detection period must be in [1, " + std::to_string(kMaxDetectionPeriod) + "]");
    b_cur_.resize(cur_.nz());
    for (std::size_t z = 0; z < cur_.nz(); ++z) b_cur_[z] = compute_checksums(cur_.layer(z), ChecksumKind::BOnly).b;
    take_checkpoint();
  }

  const Tile3D<T>& tile() const { return cur_; }
  const std::vector<std::vector<T>>& b() const { return b_cur_; }
  const Checkpoint<T>& checkpoint() const { return checkpoint_; }
  const OfflineStats& stats() const { return stats_; }
  std::int64_t iteration() const { return cur_.iteration(); }
  std::int64_t delta() const { return opts_.delta; }

  /// Runs `steps` fused sweeps from the checkpoint state and compares. Clean:
  /// a new checkpoint is taken. Mismatch: the state stays at the faulty
  /// iteration; call rollback_and_recompute().
  DetectionOutcome offline_step_block(std::int64_t steps, FaultInjector& injector) {
    if (steps < 1) throw InvalidParams("block length must be >= 1");
    if (cur_.iteration() != checkpoint_.iteration)
      throw InvalidParams("block must start at the checkpoint");
    for (std::int64_t s = 0; s < steps; ++s) advance(injector);
    DetectionOutcome out = compare();
    ++stats_.detection_points;
    if (out.outcome == BlockOutcome::Clean) {
      take_checkpoint();
    } else {
      ++stats_.mismatches;
    }
    return out;
  }

  /// Restores the checkpoint and re-executes the block up to `target`
  /// iteration without the (already fired) fault. Throws PersistentError if
  /// detection fails again.
  DetectionOutcome rollback_and_recompute(FaultInjector& injector) {
    const std::int64_t target = cur_.iteration();
    restore();
    ++stats_.rollbacks;
    injector.disarm();
    while (cur_.iteration() < target) advance(injector);
    DetectionOutcome out = compare();
    ++stats_.detection_points;
    if (out.outcome != BlockOutcome::Clean) {
      ++stats_.mismatches;
      throw PersistentError("block ending at iteration " + std::to_string(target) +
                            " failed detection after recomputation");
    }
    take_checkpoint();
    return out;
  }

  BlockResult run_block(std::int64_t steps, FaultInjector& injector) {
    BlockResult r;
    r.first = offline_step_block(steps, injector);
    if (r.first.outcome == BlockOutcome::Mismatch) {
      rollback_and_recompute(injector);
      r.rolled_back = true;
    }
    return r;
  }

  /// Runs until `iterations` sweeps have been applied in total; the last
  /// block is shortened when iterations is not a multiple of delta.
  void run(std::int64_t iterations, FaultInjector& injector) {
    while (cur_.iteration() < iterations)
      run_block(std::min(opts_.delta, iterations - cur_.iteration()), injector);
  }

 private:
  void advance(FaultInjector& injector) {
    const KernelSpec& k = sweeper_.kernel();
    if (needs_.any()) {
      std::vector<BoundaryLedger<T>> step(cur_.nz());
      for (std::size_t z = 0; z < cur_.nz(); ++z)
        step[z] = record_boundary_ledger(cur_.layer(z), k.stencil, k.bc, ChecksumKind::BOnly);
      checkpoint_.ledger_history.push_back(std::move(step));
    }
    const std::optional<ActiveFault> fault = injector.due(cur_.iteration());
    sweeper_.run(cur_, next_, &b_next_, fault ? &*fault : nullptr);
    if (fault) injector.disarm();
    std::swap(cur_, next_);
    std::swap(b_cur_, b_next_);
  }

  DetectionOutcome compare() const {
    const KernelSpec& k = sweeper_.kernel();
    const std::size_t nx = cur_.nx(), nz = cur_.nz();
    const auto steps = cur_.iteration() - checkpoint_.iteration;
    const T ghost_b = detail::ghost_line_sum<T>(k.bc, nx);
    static const BoundaryLedger<T> empty;
    std::vector<std::vector<T>> interp = checkpoint_.b;
    std::vector<std::vector<T>> next(nz);
    for (std::int64_t s = 0; s < steps; ++s) {
      for (std::size_t z = 0; z < nz; ++z) {
        const auto vert = detail::vertical_terms<T>(k, z, nz, interp, ghost_b);
        const BoundaryLedger<T>& ledger =
            needs_.any() ? checkpoint_.ledger_history[static_cast<std::size_t>(s)][z] : empty;
        next[z] = interpolate_b<T>(interp[z], k.stencil, sweeper_.constant(z).row_sums(), nx, ledger, k.bc, vert);
      }
      std::swap(interp, next);
    }
    DetectionOutcome out;
    out.iteration = cur_.iteration();
    for (std::size_t z = 0; z < nz; ++z)
      for (const Mismatch& m : detect<T>(b_cur_[z], interp[z], opts_.epsilon)) out.mismatches.push_back({z, m});
    out.outcome = out.mismatches.empty() ? BlockOutcome::Clean : BlockOutcome::Mismatch;
    return out;
  }

  void take_checkpoint() {
    checkpoint_.iteration = cur_.iteration();
    checkpoint_.tile = cur_;
    checkpoint_.b = b_cur_;
    checkpoint_.ledger_history.clear();
    if (opts_.spill_dir) spill();
  }

  void restore() {
    cur_ = checkpoint_.tile;
    b_cur_ = checkpoint_.b;
    checkpoint_.ledger_history.clear();
  }

  void spill() const {
    const auto base = *opts_.spill_dir / ("checkpoint_" + std::to_string(checkpoint_.iteration));
    write_checkpoint_files<T>(base, checkpoint_.tile, checkpoint_.b, checkpoint_.iteration, opts_.epsilon,
                              opts_.delta);
  }

  TileSweeper<T> sweeper_;
  OfflineOptions opts_;
  LedgerNeeds needs_;
  Tile3D<T> cur_;
  Tile3D<T> next_;
  std::vector<std::vector<T>> b_cur_;
  std::vector<std::vector<T>> b_next_;
  Checkpoint<T> checkpoint_;
  OfflineStats stats_;
};

}  // namespace stencilguard
