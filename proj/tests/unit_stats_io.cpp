#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <kpzlab/kpzlab.hpp>

using namespace kpzlab;
using Catch::Approx;

TEST_CASE("ks test against the standard normal") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(10.0) == Approx(1.0).margin(1e-12));

  const KsReport degenerate = ks_test_standard_normal(std::vector<double>(50, 0.0));
  CHECK(degenerate.n == 50);
  CHECK(degenerate.statistic == 0.5);
  CHECK(degenerate.p_value < 1e-6);
  CHECK_FALSE(degenerate.pass(0.01));

  CHECK_THROWS_AS(ks_test_standard_normal(std::vector<double>(49, 0.0)), ParameterError);
}

TEST_CASE("two sample ks test") {
  std::vector<double> a, b;
  for (int i = 0; i < 60; ++i) {
    a.push_back(static_cast<double>(i));
    b.push_back(static_cast<double>(i));
  }
  const KsReport same = two_sample_test(a, b);
  CHECK(same.n == 120);
  CHECK(same.statistic == Approx(1.0 / 60.0).margin(1e-15));
  CHECK(same.p_value > 0.5);

  std::vector<double> shifted;
  for (double x : a) shifted.push_back(x + 1000.0);
  const KsReport apart = two_sample_test(a, shifted);
  CHECK(apart.statistic == Approx(1.0).margin(1e-15));
  CHECK(apart.p_value < 1e-6);

  CHECK_THROWS_AS(two_sample_test(std::vector<double>(10, 0.0), a), ParameterError);
}

TEST_CASE("quadratic variation over mesh partitions") {
  const GridSpec g = GridSpec::from_count(0.0, 0.0625, 17);
  const GridFunction f = GridFunction::sample(g, [](double x) { return x; });

  CHECK(quadratic_variation(f, 0.0, 1.0, 0.25) == 0.25);
  CHECK(quadratic_variation(f, 0.0, 1.0, 0.375) == 0.34375);
  CHECK_THROWS_AS(quadratic_variation(f, 0.0, 1.0, 0.03), ParameterError);
  CHECK_THROWS_AS(quadratic_variation(f, 0.5, 0.5, 0.25), DomainError);
  CHECK_THROWS_AS(quadratic_variation(f, 0.0, 2.0, 0.25), DomainError);

  const GridSpec fine(0.0, 1.0, 1e-4);
  const GridFunction w = sample_brownian(fine, 0.0, 2.0, RngStream{424242, 7});
  const double qv = quadratic_variation(w, 0.0, 1.0, 1e-4);
  CHECK(qv > 1.85);
  CHECK(qv < 2.15);
}

TEST_CASE("holder modulus over dyadic gaps") {
  const GridSpec g = GridSpec::from_count(0.0, 0.0625, 17);
  const GridFunction f = GridFunction::sample(g, [](double x) { return 2.0 * x; });
  CHECK(holder_modulus(f, 0.0, 1.0, 0.4) == 2.0);
  CHECK_THROWS_AS(holder_modulus(f, 0.0, 1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(holder_modulus(f, 0.0, 1.0, 1.0), ParameterError);
  CHECK_THROWS_AS(holder_modulus(f, 0.5, 0.5, 0.4), DomainError);
}

TEST_CASE("argmax gap isolates the maximizer") {
  const GridSpec g(0.0, 1.0, 0.01);
  const GridFunction flat = GridFunction::sample(g, [](double) { return 1.0; });
  const ArgmaxGap tied = argmax_gap(flat, 0.0, 1.0, 10);
  CHECK(tied.degenerate);
  CHECK(tied.gap == 0.0);

  const GridFunction peaked =
      GridFunction::sample(g, [](double x) { return -(x - 0.3) * (x - 0.3); });
  const ArgmaxGap iso = argmax_gap(peaked, 0.0, 1.0, 10);
  CHECK_FALSE(iso.degenerate);
  CHECK(iso.location == Approx(0.3).margin(1e-12));
  CHECK(iso.value == Approx(0.0).margin(1e-15));
  CHECK(iso.gap == Approx(0.0121).epsilon(1e-6));

  CHECK_THROWS_AS(argmax_gap(flat, 0.0, 2.0), DomainError);
}

TEST_CASE("csv serialization uses round-trippable numbers") {
  CHECK(detail::num17(-std::numeric_limits<double>::infinity()) == "-inf");
  for (double x : {0.1, 1.0 / 3.0, 1e300, -2.5e-17, 0.0}) {
    const double back = std::strtod(detail::num17(x).c_str(), nullptr);
    CHECK(back == x);
  }

  const GridSpec g = GridSpec::from_count(0.0, 0.5, 3);
  std::vector<GridFunction> lines;
  lines.push_back(GridFunction(g, {0.0, 1.0, 2.0}));
  lines.push_back(GridFunction(g, {0.0, -1.0, -2.0}));
  const LineEnsemble ens(g, std::move(lines));
  CHECK(ensemble_csv(ens) ==
        "coordinate,line_1,line_2\n"
        "0,0,0\n"
        "0.5,1,-1\n"
        "1,2,-2\n");

  const GridFunction f(g, {0.0, 0.25, 1.0});
  CHECK(grid_function_csv(f, "height") ==
        "coordinate,height\n"
        "0,0\n"
        "0.5,0.25\n"
        "1,1\n");

  const LatticePath p = make_path(g, 0.0, 2, 1.0, 1, {0.5});
  CHECK(path_csv(p) ==
        "node,coordinate,line\n"
        "0,0,2\n"
        "1,0.5,1\n"
        "2,1,1\n");
}

TEST_CASE("initial conditions round-trip through csv") {
  const double ninf = -std::numeric_limits<double>::infinity();
  const GridSpec g = GridSpec::from_count(-0.5, 0.25, 5);
  const InitialCondition ic = InitialCondition::from_grid(g, {ninf, 0.25, -1.0, 0.5, ninf});
  const std::string text = ic_csv(*ic.as_grid());

  std::istringstream in(text);
  const InitialCondition back = ic_from_csv(in);
  REQUIRE(back.kind() == "grid");
  const GridIc* gb = back.as_grid();
  REQUIRE(gb != nullptr);
  CHECK(gb->grid == g);
  REQUIRE(gb->values.size() == 5);
  for (size_t j = 0; j < 5; ++j) CHECK(gb->values[j] == ic.as_grid()->values[j]);

  std::istringstream short_in("x,h0\n0,1\n");
  CHECK_THROWS_AS(ic_from_csv(short_in), ValidationError);
  std::istringstream ragged("x,h0\n0,1,9\n1,2,9\n");
  CHECK_THROWS_AS(ic_from_csv(ragged), ValidationError);
  std::istringstream uneven("x,h0\n0,1\n1,2\n3,4\n");
  CHECK_THROWS_AS(ic_from_csv(uneven), ValidationError);
  std::istringstream garbled("x,h0\n0,1\nbanana,2\n");
  CHECK_THROWS_AS(ic_from_csv(garbled), ValidationError);
}

TEST_CASE("initial condition specs parse by name") {
  CHECK(parse_ic("flat").kind() == "flat");
  const InitialCondition w1 = parse_ic("narrow-wedge:0.25");
  REQUIRE(w1.as_wedge() != nullptr);
  CHECK(w1.as_wedge()->a == 0.25);
  const InitialCondition w2 = parse_ic("narrow-wedge@-.5");
  REQUIRE(w2.as_wedge() != nullptr);
  CHECK(w2.as_wedge()->a == -0.5);
  CHECK(parse_ic("narrow-wedge").as_wedge()->a == 0.0);
  CHECK(parse_ic("parabola").kind() == "parabola");
  CHECK(value_at(parse_ic("parabola:2"), 1.0) == 2.0);
  CHECK_THROWS_AS(parse_ic("zigzag"), ParameterError);
  CHECK_THROWS_AS(parse_ic("flat:1"), ParameterError);
  CHECK_THROWS_AS(parse_ic("/nonexistent/missing.csv"), ParameterError);
}

TEST_CASE("config hashes and file helpers") {
  const nlohmann::json a = {{"seed", 1}, {"n", 100}};
  const nlohmann::json b = {{"seed", 2}, {"n", 100}};
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) == config_hash(a));
  CHECK(config_hash(a) != config_hash(b));

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kpzlab-io-test";
  fs::create_directories(dir);
  const std::string text_path = (dir / "note.txt").string();
  save_text(text_path, "alpha\nbeta\n");
  std::ifstream in(text_path);
  std::stringstream got;
  got << in.rdbuf();
  CHECK(got.str() == "alpha\nbeta\n");

  const std::string json_path = (dir / "cfg.json").string();
  save_json(json_path, a);
  std::ifstream jin(json_path);
  CHECK(nlohmann::json::parse(jin) == a);

  CHECK_THROWS_AS(save_text("/nonexistent-dir/x.txt", "y"), ParameterError);
  fs::remove_all(dir);
}
