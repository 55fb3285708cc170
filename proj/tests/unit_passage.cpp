#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <kpzlab/kpzlab.hpp>

using namespace kpzlab;
using Catch::Approx;

namespace {

// Two lines on nodes {0, 1, 2}: f1 = 0,1,1 and f2 = 0,2,0. The best path from
// (0, line 2) to (2, line 1) rides f2 to its peak and jumps there, value 2.
LineEnsemble toy() {
  const GridSpec g = GridSpec::from_count(0.0, 1.0, 3);
  return LineEnsemble(g, {GridFunction(g, {0.0, 1.0, 1.0}), GridFunction(g, {0.0, 2.0, 0.0})});
}

}  // namespace

TEST_CASE("toy passage value and unique optimal jump") {
  const LineEnsemble f = toy();
  CHECK(last_passage_value(f, 0.0, 2, 2.0, 1) == 2.0);
  CHECK(oracle::last_passage(f, 0.0, 2, 2.0, 1) == 2.0);

  const EnumerationResult e = enumerate_oracle(f, 0.0, 2, 2.0, 1);
  CHECK(e.value == 2.0);
  CHECK(e.paths_enumerated == 3.0);
  REQUIRE(e.optimal_jump_nodes.size() == 1);
  CHECK(e.optimal_jump_nodes[0] == std::vector<long>{1});

  const LatticePath right = rightmost_geodesic(f, 0.0, 2, 2.0, 1);
  const LatticePath left = leftmost_geodesic(f, 0.0, 2, 2.0, 1);
  CHECK(right.jump_nodes == std::vector<long>{1});
  CHECK(left.jump_nodes == std::vector<long>{1});
  CHECK(path_length(f, right) == 2.0);

  CHECK_THROWS_AS(last_passage_value(f, 2.0, 2, 0.0, 1), DomainError);
  CHECK_THROWS_AS(last_passage_value(f, 0.0, 1, 2.0, 2), DomainError);
  CHECK_THROWS_AS(enumerate_oracle(f, 0.0, 2, 2.0, 1, 2.0), ResourceError);
}

TEST_CASE("tie policies pick extreme geodesics") {
  const GridSpec g = GridSpec::from_count(0.0, 1.0, 3);
  const LineEnsemble z = LineEnsemble::zero(g, 2);
  CHECK(rightmost_geodesic(z, 0.0, 2, 2.0, 1).jump_nodes == std::vector<long>{2});
  CHECK(leftmost_geodesic(z, 0.0, 2, 2.0, 1).jump_nodes == std::vector<long>{0});
  CHECK(validate_path(rightmost_geodesic(z, 0.0, 2, 2.0, 1)));
  CHECK(last_passage_value(z, 0.0, 2, 2.0, 1) == 0.0);
}

TEST_CASE("composition through a waypoint") {
  const LineEnsemble f = toy();
  CHECK(compose_values(f, 0.0, 2, 1.0, 2, 2.0, 1) == 2.0);
  CHECK(compose_values(f, 0.0, 2, 1.0, 1, 2.0, 1) == 2.0);
  CHECK(compose_values(f, 0.0, 2, 0.0, 2, 2.0, 1) == 2.0);
  CHECK_THROWS_AS(compose_values(f, 0.0, 2, 1.0, 3, 2.0, 1), DomainError);
}

TEST_CASE("profile matches pointwise values and the transform top") {
  const LineEnsemble f = toy();
  const GridFunction prof = last_passage_profile(f, 0.0, 2, 1, 0.0, 2.0);
  REQUIRE(prof.grid.count == 3);
  CHECK(prof[0] == 0.0);
  CHECK(prof[1] == 2.0);
  CHECK(prof[2] == 2.0);

  const TransformedPair w = pitman_pair(f.line(1), f.line(2));
  CHECK(w.top.values == prof.values);
}

TEST_CASE("pitman transform toy identities") {
  const LineEnsemble f = toy();
  const TransformedPair w = pitman_pair(f.line(1), f.line(2));
  CHECK(w.top.values == std::vector<double>{0.0, 2.0, 2.0});
  CHECK(w.bottom.values == std::vector<double>{0.0, 1.0, -1.0});

  const oracle::PitmanPair ow = oracle::pitman_pair(f.line(1), f.line(2));
  CHECK(ow.top.values == w.top.values);
  CHECK(ow.bottom.values == w.bottom.values);
  CHECK(oracle::pitman_top_at(f.line(1), f.line(2), 2.0) == 2.0);

  for (long j = 0; j < 3; ++j) {
    CHECK(w.top[j] + w.bottom[j] == f.value(1, j) + f.value(2, j));
    CHECK(w.top[j] >= std::max(f.value(1, j), f.value(2, j)));
    CHECK(w.bottom[j] <= std::min(f.value(1, j), f.value(2, j)));
  }

  const TransformedPair again = pitman_pair(w.top, w.bottom);
  CHECK(again.top.values == w.top.values);
  CHECK(again.bottom.values == w.bottom.values);
}

TEST_CASE("multi start maximizes offset plus passage value") {
  const LineEnsemble f = toy();
  CHECK(multi_start_value(f, {0.0}, 2.0) == last_passage_value(f, 0.0, 1, 2.0, 1));
  CHECK(multi_start_value(f, {0.3, 0.0}, 2.0) == 2.0);
  CHECK(multi_start_value(f, {5.0, 0.0}, 2.0) == 6.0);
  CHECK(multi_start_value(f, {5.0, 0.0}, 2.0) == oracle::multi_start(f, {5.0, 0.0}, 2.0));
  CHECK_THROWS_AS(multi_start_value(f, {}, 2.0), ParameterError);
  CHECK_THROWS_AS(multi_start_value(f, {0.0, 0.0, 0.0}, 2.0), ParameterError);
}

TEST_CASE("melon sorts lines and realizes passage values") {
  const GridSpec g = GridSpec::from_count(0.0, 1.0, 3);

  const LineEnsemble single(g, {GridFunction(g, {0.0, -1.0, 2.0})});
  CHECK(melon(single).line(1).values == single.line(1).values);

  const LineEnsemble f = toy();
  const LineEnsemble w2 = melon(f);
  const TransformedPair p = pitman_pair(f.line(1), f.line(2));
  CHECK(w2.line(1).values == p.top.values);
  CHECK(w2.line(2).values == p.bottom.values);

  const LineEnsemble f3(g, {GridFunction(g, {0.0, -1.0, 0.0}), GridFunction(g, {0.0, 2.0, 1.0}),
                            GridFunction(g, {0.0, 1.0, -2.0})});
  const LineEnsemble w3 = melon(f3);
  for (long j = 0; j < 3; ++j) {
    CHECK(w3.value(1, j) >= w3.value(2, j));
    CHECK(w3.value(2, j) >= w3.value(3, j));
    const double before = f3.value(1, j) + f3.value(2, j) + f3.value(3, j);
    const double after = w3.value(1, j) + w3.value(2, j) + w3.value(3, j);
    CHECK(after == Approx(before).margin(1e-12));
  }
  const GridFunction top_prof = last_passage_profile(f3, 0.0, 3, 1, 0.0, 2.0);
  for (long j = 0; j < 3; ++j) CHECK(w3.value(1, j) == Approx(top_prof[j]).margin(1e-12));

  const LineEnsemble w3b = melon(w3);
  for (long i = 1; i <= 3; ++i) CHECK(w3b.line(i).values == w3.line(i).values);

  const LineEnsemble shifted(g, {GridFunction(g, {0.5, 0.0, 0.0})});
  CHECK_THROWS_AS(melon(shifted), DomainError);
}

TEST_CASE("gap process holds consecutive differences") {
  const LineEnsemble f = toy();
  const GapProcess gp = gap_process(f);
  CHECK(gp.k() == 2);
  CHECK(gp.gap(1).values == std::vector<double>{0.0, -1.0, 1.0});
  CHECK_THROWS_AS(gp.gap(2), DomainError);
}

TEST_CASE("rescaled melon applies the edge scaling map") {
  const GridSpec y_grid = GridSpec::from_count(0.0, 0.25, 3);
  const RngStream rng{11, 22};
  const LineEnsemble a = rescaled_melon(1, y_grid, rng);

  const double t_max = 1.10 * (1.0 + 2.0 * y_grid.right);
  const long count =
      std::max<long>(2, static_cast<long>(std::ceil(t_max / (2.0 * y_grid.step))) + 1);
  const GridSpec tau = GridSpec::from_count(0.0, t_max / static_cast<double>(count - 1), count);
  const LineEnsemble w = sample_independent_ensemble(tau, {0.0}, 1.0, rng);

  for (long j = 0; j < y_grid.count; ++j) {
    const double y = y_grid.node(j);
    const double expected = eval(w.line(1), 1.0 + 2.0 * y) - 2.0 - 2.0 * y;
    CHECK(a.value(1, j) == expected);
  }
  CHECK_THROWS_AS(rescaled_melon(0, y_grid, rng), ParameterError);
}

TEST_CASE("ensemble container validates access") {
  const GridSpec g = GridSpec::from_count(0.0, 1.0, 3);
  const LineEnsemble z = LineEnsemble::zero(g, 2);
  CHECK(z.k() == 2);
  CHECK_THROWS_AS(z.line(0), DomainError);
  CHECK_THROWS_AS(z.line(3), DomainError);
  CHECK_THROWS_AS(LineEnsemble(g, {}), ValidationError);
  const GridSpec other = GridSpec::from_count(0.0, 1.0, 4);
  CHECK_THROWS_AS(LineEnsemble(g, {GridFunction::zero(other)}), ValidationError);
}
