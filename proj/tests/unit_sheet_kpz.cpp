#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include <kpzlab/kpzlab.hpp>

using namespace kpzlab;
using Catch::Approx;

namespace {

// Deterministic two-line ensemble on tau nodes {0, .5, 1, 1.5, 2} wrapped as a
// sheet with the origin at tau = 1, scaling constants from n = 8.
SheetApprox tiny_sheet() {
  const GridSpec tau = GridSpec::from_count(0.0, 0.5, 5);
  std::vector<GridFunction> lines;
  lines.push_back(GridFunction::sample(tau, [](double t) { return 2.0 * t; }));
  lines.push_back(GridFunction::sample(tau, [](double t) { return t - 1.0; }));
  return sheet_from_ensemble(LineEnsemble(tau, std::move(lines)), 8, 2, 2);
}

}  // namespace

TEST_CASE("sheet wrapper exposes scaled coordinates") {
  const SheetApprox s = tiny_sheet();
  CHECK(s.n == 8);
  CHECK(s.m == 2);
  CHECK(s.delta == 0.5);
  CHECK(s.y_at(1) == 0.5);
  CHECK(s.y_index(0.5) == 1);
  CHECK(s.x_index(0.5) == 1);
  CHECK(s.anchor_node(1.0, 1) == 1);
  CHECK_THROWS_AS(s.y_index(40.0), DomainError);
  CHECK_THROWS_AS(s.x_index(-0.5), DomainError);
  CHECK_THROWS_AS(s.x_index(40.0), DomainError);
  CHECK_THROWS_AS(s.anchor_node(0.0, 1), DomainError);
  CHECK_THROWS_AS(s.anchor_node(1.0, 5), ParameterError);

  for (long iy = s.iy_lo; iy <= s.iy_hi; ++iy) {
    const double direct = s.top_line()[iy - s.iy_lo];
    CHECK(sheet_value(s, 0.0, s.y_at(iy)) == direct);
  }

  CHECK_THROWS_AS(sheet_from_ensemble(LineEnsemble::zero(GridSpec(0.0, 1.0, 0.5), 1), 8, 2, 1),
                  ParameterError);
  CHECK_THROWS_AS(sheet_from_ensemble(LineEnsemble::zero(GridSpec(0.0, 1.0, 0.5), 1), 0, 1, 1),
                  ParameterError);
}

TEST_CASE("frozen sheets reproduce hand-computed values") {
  const SheetApprox ref = verify::make_reference_sheet();
  CHECK(sheet_value(ref, 0.0, 0.25) == Approx(-9.0).margin(1e-12));
  CHECK(sheet_value(ref, 0.25, 0.25) == Approx(22.4 * std::sqrt(2.0) - 8.0).margin(1e-9));

  const StabilizationResult st = stabilization_check(ref, 2.0, 2, 2, 4);
  REQUIRE(st.stabilized);
  CHECK(st.k_prime == 2);
  REQUIRE(st.value);
  CHECK(*st.value == Approx(-0.8 * std::sqrt(2.0)).margin(1e-9));

  const SheetApprox cr = verify::make_crossing_sheet();
  CHECK(line_to_point_value(cr, 1.0, 2) == Approx(65.6).margin(1e-9));
  CHECK(sheet_value(cr, 1.0, 0.0) == Approx(65.6).margin(1e-9));

  const verify::TestResult full = verify::check_stub_exactness(1);
  INFO(full.detail);
  CHECK(full.pass);
}

TEST_CASE("build sheet approx validates its budget and cone") {
  const RngStream rng{3, 4};
  CHECK_THROWS_AS(build_sheet_approx(2, 3, 0.0, -0.5, 0.5, 0.1, rng), ParameterError);
  CHECK_THROWS_AS(build_sheet_approx(8, 1, 0.0, 0.5, -0.5, 0.1, rng), ParameterError);
  CHECK_THROWS_AS(build_sheet_approx(8, 1, 5.0, -0.5, 0.5, 0.25, rng), DomainError);
  CHECK_THROWS_AS(build_sheet_approx(200, 1, 0.0, -0.5, 0.5, 0.001, rng, 0, 1e6),
                  ResourceError);

  const SheetApprox s = build_sheet_approx(8, 2, 0.5, -0.5, 0.5, 0.25, rng);
  CHECK(s.n == 8);
  CHECK(s.depth == 2);
  CHECK(s.scaled.k() == 4);
  CHECK(s.delta <= 0.25 + 1e-12);
  CHECK(s.y_at(s.iy_lo) <= -0.5);
  CHECK(s.y_at(s.iy_hi) >= 0.5);
  for (long i = 1; i <= s.raw.k(); ++i) CHECK(s.raw.value(i, 0) == 0.0);
}

TEST_CASE("initial condition values and support") {
  CHECK(value_at(InitialCondition::flat(), 3.0) == 0.0);
  CHECK(value_at(InitialCondition::narrow_wedge(0.5), 0.5) == 0.0);
  CHECK(value_at(InitialCondition::narrow_wedge(0.5), 0.6) ==
        -std::numeric_limits<double>::infinity());
  CHECK(value_at(InitialCondition::parabola(2.0), 3.0) == 18.0);

  const double ninf = -std::numeric_limits<double>::infinity();
  const GridSpec g = GridSpec::from_count(-1.0, 0.5, 5);
  const InitialCondition ic = InitialCondition::from_grid(g, {ninf, 1.0, 2.0, 0.5, ninf});
  CHECK(value_at(ic, -0.5) == 1.0);
  CHECK(value_at(ic, -0.25) == Approx(1.5));
  CHECK(value_at(ic, -0.75) == ninf);
  CHECK(value_at(ic, 3.0) == ninf);
  CHECK(compact_support(ic));
  const auto [lo, hi] = support_hull(ic);
  CHECK(lo == -0.5);
  CHECK(hi == 0.5);
  CHECK(ic.kind() == "grid");

  CHECK_THROWS_AS(InitialCondition::from_grid(g, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(InitialCondition::from_grid(g, {ninf, ninf, ninf, ninf, ninf}),
                  ValidationError);
  CHECK_THROWS_AS(
      InitialCondition::from_grid(g, {0.0, 0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0}),
      ValidationError);
  CHECK_THROWS_AS(support_hull(InitialCondition::flat()), DomainError);
}

TEST_CASE("finitary verdicts split on tail growth") {
  CHECK(is_finitary(InitialCondition::flat(), 1.0).finitary);
  CHECK(is_finitary(InitialCondition::narrow_wedge(3.0), 0.25).finitary);
  CHECK(is_finitary(InitialCondition::parabola(0.5), 1.0).finitary);
  CHECK(is_finitary(InitialCondition::parabola(1.0), 0.5).finitary);
  CHECK_FALSE(is_finitary(InitialCondition::parabola(1.0), 1.0).finitary);
  CHECK_FALSE(is_finitary(InitialCondition::parabola(2.0), 1.0).finitary);
  CHECK_THROWS_AS(is_finitary(InitialCondition::flat(), 0.0), ParameterError);
}

TEST_CASE("restriction window is the hull for compact conditions") {
  const auto [wl, wr] = restriction_window(InitialCondition::narrow_wedge(0.7), 1.0, -1.0, 1.0);
  CHECK(wl == 0.7);
  CHECK(wr == 0.7);

  const auto [fl, fr] = restriction_window(InitialCondition::flat(), 1.0, -0.5, 0.5);
  CHECK(fl == -fr);
  CHECK(fr > 0.0);
  CHECK(fr < 30.0);

  CHECK_THROWS_AS(restriction_window(InitialCondition::parabola(1.0), 1.0, -1.0, 1.0),
                  NotFinitaryError);
  CHECK_THROWS_AS(restriction_window(InitialCondition::flat(), 1.0, 1.0, -1.0), ParameterError);
}

TEST_CASE("stub kernel evolution has closed forms") {
  const StubSheet quad{[](double x, double y) { return -(x - y) * (x - y); }, -5.0, 5.0, 0.01};
  const GridSpec y_grid = GridSpec::from_count(-0.5, 0.1, 11);

  const GridFunction flat = evolve(InitialCondition::flat(), 1.0, quad, y_grid);
  for (long j = 0; j < y_grid.count; ++j) CHECK(flat[j] == Approx(0.0).margin(1e-12));

  const GridFunction wedge = evolve(InitialCondition::narrow_wedge(0.5), 1.0, quad, y_grid);
  for (long j = 0; j < y_grid.count; ++j) {
    const double y = y_grid.node(j);
    CHECK(wedge[j] == Approx(-(0.5 - y) * (0.5 - y)).margin(1e-12));
  }

  const GridSpec z_grid = GridSpec::from_count(-3.0, 0.01, 601);
  const GridFunction two =
      evolve_two_step(InitialCondition::narrow_wedge(0.0), quad, quad, z_grid, y_grid);
  for (long j = 0; j < y_grid.count; ++j) {
    const double y = y_grid.node(j);
    CHECK(two[j] == Approx(-0.5 * y * y).margin(1e-10));
  }

  CHECK_THROWS_AS(evolve(InitialCondition::flat(), 0.0, quad, y_grid), ParameterError);
}

TEST_CASE("narrow wedge at the origin returns the top line bitwise") {
  const SheetApprox s = build_sheet_approx(40, 1, 0.0, -0.6, 0.6, 0.05,
                                           RngStream{77, purpose_stream("unit-wedge", 0)}, 3);
  const EvolveResult r = evolve_detailed(InitialCondition::narrow_wedge(0.0), 1.0, s, -0.5, 0.5);
  CHECK(r.gamma == 0.0);
  CHECK_FALSE(r.truncated);
  CHECK(r.h.grid.step == s.delta);
  const long iv_lo = std::lround(r.h.grid.left / s.delta);
  for (long j = 0; j < r.h.grid.count; ++j)
    CHECK(r.h[j] == s.top_line()[iv_lo + j - s.iy_lo]);
}

TEST_CASE("wedge evolution away from the origin matches the sheet kernel") {
  const SheetApprox s = build_sheet_approx(27, 1, 0.6, -0.4, 0.4, 0.05,
                                           RngStream{78, purpose_stream("unit-kernel", 0)}, 3);
  const double a = s.y_at(s.x_index(0.25));
  const EvolveResult r =
      evolve_detailed(InitialCondition::narrow_wedge(a), 1.0, s, -0.25, 0.25);
  for (long j = 0; j < r.h.grid.count; ++j) {
    const double y = r.h.grid.node(j);
    CHECK(r.h[j] == Approx(sheet_value(s, a, y)).margin(1e-9));
  }
}

TEST_CASE("grid condition evolution is the variational maximum") {
  const SheetApprox s = build_sheet_approx(27, 1, 0.8, -0.3, 0.6, 0.05,
                                           RngStream{79, purpose_stream("unit-vmax", 0)}, 3);
  const GridSpec icg = GridSpec::from_count(0.0, s.delta * 4.0, 3);
  const std::vector<double> vals = {0.2, -0.1, 0.05};
  const InitialCondition ic = InitialCondition::from_grid(icg, std::vector<double>(vals));

  const EvolveResult r = evolve_detailed(ic, 1.0, s, -0.2, 0.2);
  CHECK(r.gamma == 0.0);

  std::vector<double> xs;
  for (long j = 0; j < icg.count; ++j) xs.push_back(icg.node(j));
  for (long j = 0; j < r.h.grid.count; ++j) {
    const double y = r.h.grid.node(j);
    const double expected = oracle::variational_max(
        xs, vals, y, [&](double x, double yy) { return sheet_value(s, x, yy); });
    CHECK(r.h[j] == Approx(expected).margin(1e-9));
  }
}

TEST_CASE("evolve rejects uncovered query ranges") {
  const SheetApprox s = build_sheet_approx(27, 1, 0.0, -0.1, 0.1, 0.05,
                                           RngStream{80, purpose_stream("unit-narrow", 0)}, 2);
  CHECK_THROWS_AS(evolve(InitialCondition::narrow_wedge(0.0), 1.0, s, -0.5, 0.5), DomainError);
}
