#include <doctest.h>

#include <fstream>
#include <random>

#include <json.hpp>

#include "oracle.hpp"
#include "stencilguard/grid_io.hpp"
#include "stencilguard/kernels.hpp"
#include "stencilguard/offline.hpp"

using namespace stencilguard;

namespace {

KernelSpec kernel_of(const Stencil& s, const BoundaryCondition& bc) {
  KernelSpec k;
  k.name = s.name();
  k.stencil = s;
  k.bc = bc;
  return k;
}

template <typename T>
Tile3D<T> run_plain(Tile3D<T> t, const KernelSpec& k, int steps) {
  for (int i = 0; i < steps; ++i) t = sweep_tile(t, k);
  return t;
}

}  // namespace

TEST_CASE("iterate_interpolation: delta 1 is one interpolation") {
  std::mt19937_64 rng(1);
  const Stencil s = make_five_point(0.3, 0.1, 0.2, 0.2, 0.2).stencil;
  const auto bc = BoundaryCondition::zero();
  const auto g = oracle::random_grid<double>(rng, 9, 9);
  const auto c = ConstantField<double>::zero(9, 9);
  const auto cs = compute_checksums(g);
  const std::vector<BoundaryLedger<double>> ledgers{record_boundary_ledger(g, s, bc)};
  const auto one = interpolate_checksums(cs, s, c.column_sums(), c.row_sums(), ledgers[0], bc);
  const auto it = iterate_interpolation<double>(cs, 1, s, c.column_sums(), c.row_sums(), ledgers, bc);
  CHECK(it.a == one.a);
  CHECK(it.b == one.b);
  CHECK_THROWS_AS(iterate_interpolation<double>(cs, 0, s, c.column_sums(), c.row_sums(), ledgers, bc), InvalidParams);
  CHECK_THROWS_AS(iterate_interpolation<double>(cs, 2, s, c.column_sums(), c.row_sums(), ledgers, bc), MissingLedger);
}

TEST_CASE("iterate_interpolation: 16 periodic steps on 32x32") {
  std::mt19937_64 rng(2);
  const Stencil s = make_five_point(0.2, 0.2, 0.2, 0.2, 0.2).stencil;
  const auto bc = BoundaryCondition::periodic();
  auto g = oracle::random_grid<double>(rng, 32, 32);
  const auto c = ConstantField<double>::zero(32, 32);
  const auto cs = compute_checksums(g);
  for (int i = 0; i < 16; ++i) g = sweep(g, s, c, bc);
  const auto it = iterate_interpolation<double>(cs, 16, s, c.column_sums(), c.row_sums(), {}, bc);
  CHECK(oracle::rel_gap(oracle::column_sums(g), it.a) <= 1e-10);
  CHECK(oracle::rel_gap(oracle::row_sums(g), it.b) <= 1e-10);
}

TEST_CASE("iterate_interpolation: identity stencil is a no-op for any delta") {
  std::mt19937_64 rng(3);
  const auto g = oracle::random_grid<float>(rng, 7, 7);
  const auto c = ConstantField<float>::zero(7, 7);
  const auto cs = compute_checksums(g);
  const auto it = iterate_interpolation<float>(cs, 37, Stencil("id", {{0, 0, 1}}), c.column_sums(), c.row_sums(), {},
                                               BoundaryCondition::bounce_back());
  CHECK(it.a == cs.a);
  CHECK(it.b == cs.b);
}

TEST_CASE("block equality for every boundary kind") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 24; ++trial) {
    const Stencil s = oracle::random_stencil(rng, 9, 2);
    const auto bc = oracle::random_bc(rng);
    const std::size_t nx = 3 + rng() % 30, ny = 3 + rng() % 30;
    const int delta = 1 + static_cast<int>(rng() % 32);
    // Weights normalized so the state stays O(1) over the block.
    std::vector<StencilPoint> pts = s.points();
    const double sum = s.weight_sum();
    for (auto& p : pts) p.w /= sum;
    const Stencil norm("norm", pts);
    auto g = oracle::random_grid<double>(rng, nx, ny);
    const auto c = ConstantField<double>::per_cell(oracle::random_grid<double>(rng, nx, ny, 0, 0.01));
    const auto cs = compute_checksums(g);
    std::vector<BoundaryLedger<double>> ledgers;
    for (int i = 0; i < delta; ++i) {
      ledgers.push_back(record_boundary_ledger(g, norm, bc));
      g = sweep(g, norm, c, bc);
    }
    const auto it = iterate_interpolation<double>(cs, delta, norm, c.column_sums(), c.row_sums(), ledgers, bc);
    CHECK(oracle::rel_gap(oracle::column_sums(g), it.a) <= 1e-10);
    CHECK(oracle::rel_gap(oracle::row_sums(g), it.b) <= 1e-10);
  }
}

TEST_CASE("error-free block checkpoints at t + delta") {
  std::mt19937_64 rng(5);
  const TileDims dims{16, 16, 4};
  const KernelSpec k = make_kernel("hotspot3d", dims);
  OfflineAbft<float> abft(k, initial_tile<float>(k, dims), {1e-5, 8, 1, std::nullopt});
  FaultInjector none;
  const auto out = abft.offline_step_block(8, none);
  CHECK(out.outcome == BlockOutcome::Clean);
  CHECK(abft.checkpoint().iteration == 8);
  CHECK(abft.tile() == run_plain(initial_tile<float>(k, dims), k, 8));
}

TEST_CASE("a flip inside a block triggers rollback and exact recovery") {
  const TileDims dims{16, 16, 4};
  const KernelSpec k = make_kernel("hotspot3d", dims);
  OfflineAbft<float> abft(k, initial_tile<float>(k, dims), {1e-5, 16, 1, std::nullopt});
  FaultSpec spec;
  spec.iteration = 3;
  spec.z = 2;
  spec.x = 5;
  spec.y = 9;
  spec.bit = 27;
  FaultInjector inj(spec);
  const auto first = abft.offline_step_block(16, inj);
  CHECK(first.outcome == BlockOutcome::Mismatch);
  REQUIRE_FALSE(first.mismatches.empty());
  // Vertical coupling spreads the error to the neighboring layers too.
  bool hit = false;
  for (const auto& m : first.mismatches) hit |= m.z == 2;
  CHECK(hit);
  CHECK(inj.fired());
  CHECK_FALSE(inj.armed());
  const auto second = abft.rollback_and_recompute(inj);
  CHECK(second.outcome == BlockOutcome::Clean);
  CHECK(abft.stats().rollbacks == 1);
  CHECK(abft.tile() == run_plain(initial_tile<float>(k, dims), k, 16));
}

TEST_CASE("low mantissa flips on O(1) data pass detection") {
  const TileDims dims{64, 64, 2};
  const KernelSpec k = make_kernel("hotspot3d", dims);
  for (int bit = 0; bit <= 12; ++bit) {
    OfflineAbft<float> abft(k, initial_tile<float>(k, dims), {1e-5, 16, 1, std::nullopt});
    FaultSpec spec;
    spec.iteration = 5;
    spec.x = 30;
    spec.y = 31;
    spec.bit = bit;
    FaultInjector inj(spec);
    const auto r = abft.run_block(16, inj);
    CHECK(r.first.outcome == BlockOutcome::Clean);
    CHECK_FALSE(r.rolled_back);
  }
}

TEST_CASE("two faults in different blocks give two rollbacks") {
  const TileDims dims{12, 12, 3};
  const KernelSpec k = make_kernel("hotspot3d", dims);
  OfflineAbft<float> abft(k, initial_tile<float>(k, dims), {1e-5, 8, 1, std::nullopt});
  FaultSpec a;
  a.iteration = 2;
  a.bit = 30;
  FaultSpec b;
  b.iteration = 13;
  b.z = 1;
  b.x = 11;
  b.y = 4;
  b.bit = 31;
  FaultInjector ia(a), ib(b);
  CHECK(abft.run_block(8, ia).rolled_back);
  CHECK(abft.run_block(8, ib).rolled_back);
  FaultInjector none;
  abft.run(32, none);
  CHECK(abft.stats().rollbacks == 2);
  CHECK(abft.tile() == run_plain(initial_tile<float>(k, dims), k, 32));
}

TEST_CASE("ghost boundaries carry the ledger history through a block") {
  std::mt19937_64 rng(6);
  KernelSpec k = kernel_of(make_five_point(0.4, 0.1, 0.2, 0.15, 0.15).stencil, BoundaryCondition::constant(1.5));
  k.w_top = 0.05;
  const auto t0 = oracle::random_tile<double>(rng, 10, 8, 2, 1, 2);
  OfflineAbft<double> abft(k, t0, {1e-9, 16, 1, std::nullopt});
  FaultInjector none;
  abft.run(48, none);
  CHECK(abft.stats().mismatches == 0);
  CHECK(abft.stats().detection_points == 3);
  CHECK(abft.tile() == run_plain(t0, k, 48));
}

TEST_CASE("a block that fails again after rollback is persistent") {
  // 128 chained binary32 interpolations drift past 1e-5 on this tile even
  // without any fault, so the recomputed block mismatches too.
  const TileDims dims{64, 64, 8};
  const KernelSpec k = make_kernel("hotspot3d", dims);
  OfflineAbft<float> abft(k, initial_tile<float>(k, dims), {1e-5, 128, 1, std::nullopt});
  FaultInjector none;
  CHECK_THROWS_AS(abft.run(128, none), PersistentError);
  CHECK(abft.stats().rollbacks == 1);
}

TEST_CASE("parameter checks") {
  const TileDims dims{8, 8, 1};
  const KernelSpec k = make_kernel("five-point", dims);
  CHECK_THROWS_AS(OfflineAbft<float>(k, initial_tile<float>(k, dims), {1e-5, 0, 1, std::nullopt}), InvalidParams);
  CHECK_THROWS_AS(OfflineAbft<float>(k, initial_tile<float>(k, dims), {1e-5, 129, 1, std::nullopt}), InvalidParams);
  CHECK_THROWS_AS(OfflineAbft<float>(k, initial_tile<float>(k, dims), {0.0, 16, 1, std::nullopt}), InvalidParams);
}

TEST_CASE("checkpoints spill to ABFTGRID plus a JSON sidecar") {
  const auto dir = std::filesystem::temp_directory_path() / "stencilguard_spill";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const TileDims dims{8, 8, 2};
  const KernelSpec k = make_kernel("hotspot3d", dims);
  OfflineAbft<float> abft(k, initial_tile<float>(k, dims), {1e-5, 4, 1, dir});
  FaultInjector none;
  abft.run(8, none);
  auto grid = read_abftgrid<float>(dir / "checkpoint_8.abftgrid");
  grid.set_iteration(8);  // the file format carries values only
  CHECK(grid == abft.tile());
  std::ifstream in(dir / "checkpoint_8.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["iteration"] == 8);
  CHECK(j["delta"] == 4);
  CHECK(j["b"].size() == 2);
  CHECK(j["b"][1].size() == 8);
  CHECK(static_cast<float>(j["b"][0][3].get<double>()) == abft.b()[0][3]);
  CHECK(std::filesystem::exists(dir / "checkpoint_0.abftgrid"));
}
