#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "property.hpp"
#include "stencilguard/kernels.hpp"
#include "stencilguard/online.hpp"

using namespace stencilguard;

namespace {

KernelSpec kernel_of(const Stencil& s, const BoundaryCondition& bc) {
  KernelSpec k;
  k.name = s.name();
  k.stencil = s;
  k.bc = bc;
  return k;
}

Tile3D<float> single_layer(const Grid2D<float>& g) { return Tile3D<float>(std::vector<Grid2D<float>>{g}); }

}  // namespace

TEST_CASE("ledger needs per boundary kind") {
  const Stencil sym = make_five_point(0.2, 0.2, 0.2, 0.2, 0.2).stencil;
  const Stencil skew = make_five_point(0.4, 0.1, 0.2, 0.15, 0.15).stencil;
  const Stencil wide("wide", {{0, 0, 0.5}, {-2, 0, 0.25}, {2, 0, 0.25}});
  CHECK_FALSE(ledger_needs(skew, BoundaryCondition::periodic()).any());
  CHECK_FALSE(ledger_needs(sym, BoundaryCondition::bounce_back()).any());

  const auto skew_bb = ledger_needs(skew, BoundaryCondition::bounce_back());
  CHECK(skew_bb.beta);       // unequal x weights
  CHECK_FALSE(skew_bb.alpha);  // equal y weights
  CHECK(ledger_needs(wide, BoundaryCondition::bounce_back()).beta);
  CHECK_FALSE(ledger_needs(wide, BoundaryCondition::bounce_back()).alpha);

  const auto z = ledger_needs(sym, BoundaryCondition::zero());
  CHECK((z.alpha && z.beta));
  CHECK_FALSE(ledger_needs(Stencil("id", {{0, 0, 1}}), BoundaryCondition::constant(2)).any());
}

TEST_CASE("identity stencil interpolates to the same checksums") {
  std::mt19937_64 rng(1);
  const auto g = oracle::random_grid<float>(rng, 9, 7);
  const auto cs = compute_checksums(g);
  const auto c = ConstantField<float>::zero(9, 7);
  for (const auto& bc : {BoundaryCondition::periodic(), BoundaryCondition::zero()}) {
    const Stencil id("id", {{0, 0, 1}});
    const auto out = interpolate_checksums(cs, id, c.column_sums(), c.row_sums(), record_boundary_ledger(g, id, bc), bc);
    CHECK(out.a == cs.a);
    CHECK(out.b == cs.b);
  }
}

TEST_CASE("periodic five-point interpolation equals direct checksums") {
  std::mt19937_64 rng(2);
  const Stencil s = make_five_point(0.3, 0.1, 0.25, 0.2, 0.15).stencil;
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = oracle::random_grid<double>(rng, 8, 8);
    CHECK(property::interpolation_gap(g, s, ConstantField<double>::zero(8, 8), BoundaryCondition::periodic()) <= 1e-12);
  }
}

TEST_CASE("bounce-back: symmetric weights need no boundary terms") {
  std::mt19937_64 rng(3);
  const Stencil s = make_five_point(0.2, 0.2, 0.2, 0.2, 0.2).stencil;
  const auto g = oracle::random_grid<double>(rng, 16, 16);
  const auto bc = BoundaryCondition::bounce_back();
  const auto ledger = record_boundary_ledger(g, s, bc);
  CHECK(ledger.empty());
  CHECK(property::interpolation_gap(g, s, ConstantField<double>::zero(16, 16), bc) <= 1e-12);
}

TEST_CASE("bounce-back: unequal weights need the boundary terms") {
  std::mt19937_64 rng(4);
  const Stencil s = make_five_point(0.4, 0.1, 0.2, 0.15, 0.15).stencil;
  const auto g = oracle::random_grid<double>(rng, 16, 16);
  const auto bc = BoundaryCondition::bounce_back();
  const auto c = ConstantField<double>::zero(16, 16);
  const auto direct = oracle::row_sums(sweep(g, s, c, bc));
  const auto cs = compute_checksums(g);

  // Dropping the terms leaves the edge columns' clamped reads unaccounted for.
  BoundaryLedger<double> none;
  none.beta.emplace_back(-1, std::vector<double>(16, 0.0));
  none.beta.emplace_back(1, std::vector<double>(16, 0.0));
  const auto without = interpolate_b<double>(cs.b, s, c.row_sums(), 16, none, bc);
  CHECK(oracle::rel_gap(direct, without) > 1e-6);

  const auto with = interpolate_b<double>(cs.b, s, c.row_sums(), 16, record_boundary_ledger(g, s, bc), bc);
  CHECK(oracle::rel_gap(direct, with) <= 1e-12);
}

TEST_CASE("ledger entries for ghost boundaries") {
  std::mt19937_64 rng(5);
  const auto g = oracle::random_grid<double>(rng, 6, 6);
  const Stencil s("ud", {{0, 0, 0.5}, {0, 1, 0.3}, {0, -1, 0.2}});

  const auto zero = record_boundary_ledger(g, s, BoundaryCondition::zero());
  const auto* up = zero.alpha_for(1);
  REQUIRE(up != nullptr);
  for (std::size_t x = 0; x < 6; ++x) CHECK((*up)[x] == -g.at(x, 0));

  const double v = 0.75;
  const auto constant = record_boundary_ledger(g, s, BoundaryCondition::constant(v));
  const auto* down = constant.alpha_for(-1);
  REQUIRE(down != nullptr);
  for (std::size_t x = 0; x < 6; ++x) CHECK((*down)[x] == doctest::Approx(v - g.at(x, 5)).epsilon(1e-15));

  CHECK(property::interpolation_gap(g, s, ConstantField<double>::zero(6, 6), BoundaryCondition::constant(v)) <= 1e-12);
  CHECK(record_boundary_ledger(g, s, BoundaryCondition::periodic()).empty());
}

TEST_CASE("missing ledger is an error") {
  const Stencil s = make_five_point(0.2, 0.2, 0.2, 0.2, 0.2).stencil;
  const auto c = ConstantField<double>::zero(5, 5);
  const auto cs = compute_checksums(Grid2D<double>(5, 5, 1.0));
  CHECK_THROWS_AS(interpolate_checksums(cs, s, c.column_sums(), c.row_sums(), BoundaryLedger<double>{},
                                        BoundaryCondition::zero()),
                  MissingLedger);
}

TEST_CASE("random stencils, boundaries and constants satisfy the checksum identity") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rc = property::random_case(rng);
    const auto g = oracle::random_grid<double>(rng, rc.nx, rc.ny);
    const auto c = ConstantField<double>::per_cell(oracle::random_grid<double>(rng, rc.nx, rc.ny));
    CHECK(property::interpolation_gap(g, rc.stencil, c, rc.bc) <= 1e-12);
  }
}

TEST_CASE("detect") {
  const std::vector<float> d{1, 2, 3, 4, 5};
  CHECK(detect<float>(d, d, 1e-5).empty());

  auto p = d;
  p[3] *= 1.001f;
  const auto m = detect<float>(d, p, 1e-5);
  REQUIRE(m.size() == 1);
  CHECK(m[0].index == 3);
  CHECK(m[0].rel_error == doctest::Approx(1e-3).epsilon(1e-3));

  auto inf = d;
  inf[2] = std::numeric_limits<float>::infinity();
  const auto mi = detect<float>(inf, d, 1e-5);
  REQUIRE(mi.size() == 1);
  CHECK(std::isinf(mi[0].rel_error));
  CHECK(detect<float>(d, inf, 1e-5).size() == 1);

  // Below the floor the comparison is absolute.
  const std::vector<double> zd{0.0, 0.0};
  CHECK(detect<double>(zd, std::vector<double>{1e-7, 0.0}, 1e-5).empty());
  CHECK(detect<double>(zd, std::vector<double>{1e-3, 0.0}, 1e-5).size() == 1);

  CHECK_THROWS_AS(detect<float>(d, std::vector<float>{1}, 1e-5), LengthMismatch);
  CHECK_THROWS_AS(detect<float>(d, d, 0.0), InvalidParams);
}

TEST_CASE("error-free online steps leave the result identical to plain sweeps") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rc = property::random_case(rng);
    const KernelSpec k = kernel_of(rc.stencil, rc.bc);
    auto t = oracle::random_tile<float>(rng, rc.nx, rc.ny, 1, 0.5, 1.5);
    OnlineAbft<float> abft(k, t, {1e-5, 1});
    for (int step = 0; step < 4; ++step) {
      const auto rep = abft.step();
      t = sweep_tile(t, k);
      CHECK(rep.records.empty());
      CHECK(abft.tile() == t);
    }
  }
}

TEST_CASE("a single flip is located and corrected") {
  std::mt19937_64 rng(8);
  const KernelSpec k = make_kernel("five-point", {16, 16, 1});
  const auto t0 = single_layer(oracle::random_grid<float>(rng, 16, 16, 1, 2));
  const auto clean = sweep_tile(t0, k);
  OnlineAbft<float> abft(k, t0);
  // Bit 16 moves a value in [1, 2) by 2^-7, about 1e-2 relative.
  const ActiveFault f{0, 7, 3, 16, FaultTarget::Domain};
  const auto rep = abft.step(&f);
  CHECK(rep.detected);
  REQUIRE(rep.records.size() == 1);
  CHECK(rep.records[0].ex == 7);
  CHECK(rep.records[0].ey == 3);
  CHECK(rep.records[0].consistent);
  CHECK(rep.records[0].observed == flip_bit(clean.at(7, 3, 0), 16));
  CHECK(rep.records[0].corrected == doctest::Approx(clean.at(7, 3, 0)).epsilon(1e-5));
  // Post-correction b agrees with a fresh sum of the corrected grid.
  CHECK(oracle::rel_gap(oracle::row_sums(abft.tile().layer(0)), abft.b()[0]) <= 1e-6);
}

TEST_CASE("non-finite and huge flips are corrected through the line recompute") {
  std::mt19937_64 rng(9);
  const KernelSpec k = make_kernel("average4", {12, 12, 1});
  const auto t0 = single_layer(oracle::random_grid<float>(rng, 12, 12, 1, 2));
  const auto clean = sweep_tile(t0, k);
  for (int bit : {30, 29, 27}) {
    OnlineAbft<float> abft(k, t0);
    const ActiveFault f{0, 4, 9, bit, FaultTarget::Domain};
    const auto rep = abft.step(&f);
    REQUIRE(rep.records.size() == 1);
    CHECK_FALSE(rep.uncorrectable);
    CHECK(abft.tile().at(4, 9, 0) == doctest::Approx(clean.at(4, 9, 0)).epsilon(1e-5));
  }
}

TEST_CASE("correction in a ghost-bounded, constant-driven 3D tile") {
  std::mt19937_64 rng(10);
  KernelSpec k = make_five_point(0.3, 0.1, 0.2, 0.1, 0.1);
  k.bc = BoundaryCondition::constant(1.25);
  k.w_top = 0.1;
  k.w_bottom = 0.1;
  k.constant = [](std::size_t x, std::size_t y, std::size_t z) { return 0.001 * static_cast<double>(x + 2 * y + z); };
  const auto t0 = oracle::random_tile<float>(rng, 10, 9, 3, 1, 2);
  auto clean = t0;
  OnlineAbft<float> abft(k, t0);
  for (int step = 0; step < 6; ++step) {
    const ActiveFault f{1, 2, 5, 20, FaultTarget::Domain};
    const auto rep = abft.step(step == 2 ? &f : nullptr);
    clean = sweep_tile(clean, k);
    CHECK_FALSE(rep.uncorrectable);
    CHECK(rep.records.size() == (step == 2 ? 1u : 0u));
  }
  for (std::size_t z = 0; z < 3; ++z)
    for (std::size_t i = 0; i < clean.layer(z).size(); ++i)
      CHECK(abft.tile().layer(z).values()[i] == doctest::Approx(clean.layer(z).values()[i]).epsilon(1e-5));
}

TEST_CASE("subsequent steps do not re-detect a corrected error") {
  std::mt19937_64 rng(11);
  const KernelSpec k = make_kernel("five-point", {20, 20, 1});
  OnlineAbft<float> abft(k, single_layer(oracle::random_grid<float>(rng, 20, 20, 1, 2)));
  const ActiveFault f{0, 11, 4, 31, FaultTarget::Domain};
  CHECK(abft.step(&f).records.size() == 1);
  for (int step = 0; step < 10; ++step) CHECK_FALSE(abft.step().detected);
}

TEST_CASE("checksum-resident error is repaired without touching the data") {
  std::mt19937_64 rng(12);
  const KernelSpec k = make_kernel("five-point", {16, 16, 1});
  const auto t0 = single_layer(oracle::random_grid<float>(rng, 16, 16, 1, 2));
  OnlineAbft<float> abft(k, t0);
  const ActiveFault f{0, 0, 6, 25, FaultTarget::Checksum};
  const auto rep = abft.step(&f);
  CHECK(rep.detected);
  CHECK(rep.records.empty());
  CHECK(rep.checksum_repairs == 1);
  CHECK(abft.tile() == sweep_tile(t0, k));
  CHECK(abft.b()[0] == oracle::row_sums(abft.tile().layer(0)));
}

namespace {

struct Corrupted {
  Grid2D<double> grid;
  std::vector<double> a, b, a_interp, b_interp;
};

// One sweep of a random grid, the cells in `hits` moved by `delta`, and the
// checksums a detector would see.
Corrupted corrupt(std::mt19937_64& rng, const std::vector<std::pair<std::size_t, std::size_t>>& hits,
                  std::vector<double> deltas) {
  const Stencil s = make_five_point(0.2, 0.2, 0.2, 0.2, 0.2).stencil;
  const auto bc = BoundaryCondition::periodic();
  const auto g = oracle::random_grid<double>(rng, 8, 8, 1, 2);
  const auto c = ConstantField<double>::zero(8, 8);
  const auto cs = compute_checksums(g);
  const auto interp = interpolate_checksums(cs, s, c.column_sums(), c.row_sums(), {}, bc);
  Corrupted out{sweep(g, s, c, bc), {}, {}, interp.a, interp.b};
  for (std::size_t i = 0; i < hits.size(); ++i) out.grid.at(hits[i].first, hits[i].second) += deltas[i];
  const auto direct = compute_checksums(out.grid);
  out.a = direct.a;
  out.b = direct.b;
  return out;
}

DetectionReport report_of(const Corrupted& c) {
  return make_report(detect<double>(c.a, c.a_interp, 1e-5), detect<double>(c.b, c.b_interp, 1e-5));
}

}  // namespace

TEST_CASE("two errors on a diagonal are both corrected") {
  std::mt19937_64 rng(13);
  auto c = corrupt(rng, {{1, 1}, {2, 2}}, {0.5, -0.25});
  const auto original_11 = c.grid.at(1, 1) - 0.5;
  const auto original_22 = c.grid.at(2, 2) + 0.25;
  const auto rep = report_of(c);
  const auto recs = locate_and_correct<double>(c.grid, c.a, c.b, c.a_interp, c.b_interp, rep, 1e-5);
  REQUIRE(recs.size() == 2);
  CHECK(c.grid.at(1, 1) == doctest::Approx(original_11).epsilon(1e-12));
  CHECK(c.grid.at(2, 2) == doctest::Approx(original_22).epsilon(1e-12));
  // Fixed point: the repaired checksums no longer mismatch.
  CHECK(detect<double>(c.a, c.a_interp, 1e-5).empty());
  CHECK(detect<double>(c.b, c.b_interp, 1e-5).empty());
}

TEST_CASE("anti-diagonal pairing is found by consistency, not index order") {
  std::mt19937_64 rng(14);
  auto c = corrupt(rng, {{1, 5}, {4, 2}}, {0.5, 0.75});
  const auto want_15 = c.grid.at(1, 5) - 0.5;
  const auto want_42 = c.grid.at(4, 2) - 0.75;
  const auto recs = locate_and_correct<double>(c.grid, c.a, c.b, c.a_interp, c.b_interp, report_of(c), 1e-5);
  REQUIRE(recs.size() == 2);
  CHECK(c.grid.at(1, 5) == doctest::Approx(want_15).epsilon(1e-12));
  CHECK(c.grid.at(4, 2) == doctest::Approx(want_42).epsilon(1e-12));
}

TEST_CASE("two errors in one column are uncorrectable") {
  std::mt19937_64 rng(15);
  auto c = corrupt(rng, {{1, 1}, {1, 2}}, {0.5, 0.25});
  const auto rep = report_of(c);
  CHECK(rep.err_x.size() == 1);
  CHECK(rep.err_y.size() == 2);
  const auto before = c.grid;
  CHECK_THROWS_AS(locate_and_correct<double>(c.grid, c.a, c.b, c.a_interp, c.b_interp, rep, 1e-5), Uncorrectable);
  CHECK(c.grid == before);
}

TEST_CASE("errors that cancel within a row go unnoticed in b") {
  std::mt19937_64 rng(16);
  auto c = corrupt(rng, {{2, 3}, {5, 3}}, {0.5, -0.5});
  CHECK(detect<double>(c.b, c.b_interp, 1e-5).empty());
  CHECK(detect<double>(c.a, c.a_interp, 1e-5).size() == 2);
}

TEST_CASE("online reports uncorrectable and keeps going") {
  std::mt19937_64 rng(17);
  const KernelSpec k = make_kernel("five-point", {8, 8, 1});
  OnlineAbft<float> abft(k, single_layer(oracle::random_grid<float>(rng, 8, 8, 1, 2)));
  abft.step();
  // Corrupt two cells of one column behind the detector's back.
  auto& tile = const_cast<Tile3D<float>&>(abft.tile());
  tile.at(3, 1, 0) += 0.5f;
  tile.at(3, 6, 0) += 0.25f;
  const auto rep = abft.step();
  CHECK(rep.detected);
  CHECK(rep.uncorrectable);
  CHECK_FALSE(rep.message.empty());
}
