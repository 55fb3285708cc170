#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <kpzlab/kpzlab.hpp>

using namespace kpzlab;
using Catch::Approx;

TEST_CASE("grid construction and node lookup") {
  const GridSpec g(0.0, 1.0, 0.25);
  CHECK(g.count == 5);
  CHECK(g.node(4) == 1.0);
  CHECK(g.contains(1.0));
  CHECK_FALSE(g.contains(1.1));
  CHECK(g.nearest(0.26) == 1);
  CHECK(g.nearest(-3.0) == 0);
  CHECK(g.nearest(9.0) == 4);
  CHECK(g.index_at(0.5) == 2);
  CHECK_THROWS_AS(g.index_at(0.3), DomainError);
  CHECK_THROWS_AS(GridSpec(0.0, 1.0, 0.3), DomainError);
  CHECK_THROWS_AS(GridSpec(1.0, 0.0, 0.5), DomainError);
  CHECK_THROWS_AS(GridSpec(0.0, 1.0, -0.5), DomainError);
  CHECK_THROWS_AS(GridSpec::from_count(0.0, 0.5, 1), DomainError);

  const GridSpec h = GridSpec::from_count(-0.5, 0.1, 11);
  CHECK(h.right == Approx(0.5));
  CHECK(h == h);
  CHECK_FALSE(g == h);
}

TEST_CASE("grid function validation and evaluation") {
  const GridSpec g = GridSpec::from_count(0.0, 0.5, 3);
  CHECK_THROWS_AS(GridFunction(g, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(GridFunction(g, {1.0, std::nan(""), 0.0}), ValidationError);

  const GridFunction f(g, {0.0, 1.0, 0.0});
  CHECK(eval(f, 0.25) == Approx(0.5));
  CHECK(eval(f, 0.5) == 1.0);
  CHECK(eval(f, 1.0) == 0.0);
  CHECK_THROWS_AS(eval(f, 1.5), DomainError);

  const GridFunction s = GridFunction::sample(g, [](double x) { return 2.0 * x; });
  CHECK(s[2] == 2.0);
}

TEST_CASE("lattice path bookkeeping") {
  const GridSpec g = GridSpec::from_count(0.0, 1.0, 4);
  const LatticePath p = make_path(g, 0.0, 3, 3.0, 1, {1.0, 2.0});
  CHECK(p.x() == 0.0);
  CHECK(p.y() == 3.0);
  CHECK(p.line_at(0) == 3);
  CHECK(p.line_at(1) == 2);
  CHECK(p.line_at(2) == 1);
  CHECK(p.line_at(3) == 1);
  CHECK(p.line_before(1) == 3);
  CHECK(p.line_before(2) == 2);
  CHECK(validate_path(p));
  CHECK(p.jump_times() == std::vector<double>{1.0, 2.0});

  CHECK_THROWS_AS(make_path(g, 0.0, 3, 3.0, 1, {2.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(make_path(g, 0.0, 3, 3.0, 1, {1.0}), ValidationError);
  CHECK_THROWS_AS(make_path(g, 2.0, 2, 1.0, 1, {2.0}), ValidationError);
}

TEST_CASE("path length telescopes the line increments") {
  const GridSpec g = GridSpec::from_count(0.0, 1.0, 4);
  std::vector<GridFunction> lines;
  for (double c : {1.0, 2.0, 3.0})
    lines.push_back(GridFunction::sample(g, [c](double x) { return c * x; }));
  const LineEnsemble f(g, {lines[0], lines[1], lines[2]});

  const LatticePath p = make_path(g, 0.0, 3, 3.0, 1, {1.0, 2.0});
  CHECK(path_length(f, p) == Approx(6.0));
  CHECK(path_length_gap_form(f, p) == Approx(6.0));

  LatticePath bad = p;
  bad.grid = GridSpec::from_count(0.0, 0.5, 7);
  CHECK_THROWS_AS(path_length(f, bad), ValidationError);
}

TEST_CASE("rng streams reproduce and separate") {
  auto e1 = make_engine(RngStream{7, 9});
  auto e2 = make_engine(RngStream{7, 9});
  for (int i = 0; i < 5; ++i) CHECK(e1() == e2());

  auto e3 = make_engine(RngStream{7, 10});
  auto e4 = make_engine(RngStream{7, 9});
  CHECK(e3() != e4());

  CHECK(purpose_stream("alpha", 3) == purpose_stream("alpha", 3));
  CHECK(purpose_stream("alpha", 3) != purpose_stream("beta", 3));
  CHECK(purpose_stream("alpha", 3) != purpose_stream("alpha", 4));
  CHECK(RngStream{5, 0}.with_stream(8).stream_id == 8);
}

TEST_CASE("samplers pin endpoints and reproduce streams") {
  const GridSpec g = GridSpec::from_count(0.0, 0.125, 17);

  const GridFunction b1 = sample_brownian(g, 1.5, 1.0, RngStream{42, 1});
  const GridFunction b2 = sample_brownian(g, 1.5, 1.0, RngStream{42, 1});
  CHECK(b1[0] == 1.5);
  CHECK(b1.values == b2.values);
  const GridFunction b3 = sample_brownian(g, 1.5, 1.0, RngStream{42, 2});
  CHECK(b1.values != b3.values);

  const GridFunction br = sample_bridge(g, -0.25, 0.75, 1.0, RngStream{42, 3});
  CHECK(br[0] == -0.25);
  CHECK(br[16] == 0.75);

  const LineEnsemble one = sample_independent_ensemble(g, {1.5}, 1.0, RngStream{42, 1});
  CHECK(one.line(1).values == b1.values);

  CHECK_THROWS_AS(sample_brownian(g, 0.0, 0.0, RngStream{1, 1}), ParameterError);
  CHECK_THROWS_AS(sample_independent_ensemble(g, {}, 1.0, RngStream{1, 1}), ParameterError);
}

TEST_CASE("nonintersecting bridges stay ordered or reject") {
  const GridSpec g = GridSpec::from_count(0.0, 0.25, 5);

  BridgeSystemSpec spec;
  spec.left_values = {1.0, 0.0};
  spec.right_values = {1.0, 0.0};
  const LineEnsemble f = sample_nonintersecting_bridges(g, spec, RngStream{9, 1});
  for (long j = 0; j < g.count; ++j) CHECK(f.value(1, j) > f.value(2, j));

  BridgeSystemSpec solo;
  solo.left_values = {0.5};
  solo.right_values = {-0.5};
  const LineEnsemble s = sample_nonintersecting_bridges(g, solo, RngStream{9, 2});
  const GridFunction direct = sample_bridge(g, 0.5, -0.5, 1.0, RngStream{9, 2});
  CHECK(s.line(1).values == direct.values);

  BridgeSystemSpec bad;
  bad.left_values = {0.0, 1.0};
  bad.right_values = {1.0, 0.0};
  CHECK_THROWS_AS(sample_nonintersecting_bridges(g, bad, RngStream{9, 3}), ParameterError);

  BridgeSystemSpec tight;
  tight.left_values = {0.0};
  tight.right_values = {0.0};
  tight.upper = GridFunction::sample(
      g, [](double x) { return (x == 0.0 || x == 1.0) ? 1e-9 : -50.0; });
  tight.max_attempts = 40;
  CHECK_THROWS_AS(sample_nonintersecting_bridges(g, tight, RngStream{9, 4}), RejectionError);
}

TEST_CASE("parallel for covers the range and rethrows") {
  std::vector<long> a(100, -1), b(100, -1);
  parallel_for(100, 1, [&](long i) { a[static_cast<size_t>(i)] = i * i; });
  parallel_for(100, 4, [&](long i) { b[static_cast<size_t>(i)] = i * i; });
  CHECK(a == b);
  CHECK(a[99] == 99 * 99);

  CHECK_THROWS_AS(parallel_for(64, 4,
                               [&](long i) {
                                 if (i == 17) throw DomainError("boom");
                               }),
                  DomainError);
  CHECK(default_workers() >= 1);
}

TEST_CASE("error types share one base") {
  try {
    throw ParameterError("p");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "p");
  }
  try {
    throw NotFinitaryError("n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "n");
  }
}
