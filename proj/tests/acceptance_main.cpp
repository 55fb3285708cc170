// Acceptance gate: one criterion per line, pass only when every check inside
// the criterion passes. Parameters are pinned here and must not be weakened.

#include <cstdio>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include <kpzlab/kpzlab.hpp>

namespace {

constexpr std::uint64_t kSeed = 12345;

bool collect(const std::vector<kpzlab::verify::TestResult>& rs, std::string& note) {
  bool ok = true;
  for (const auto& r : rs) {
    if (r.pass) continue;
    ok = false;
    if (note.empty()) {
      note = r.test;
      if (!r.detail.empty()) note += " (" + r.detail + ")";
    }
  }
  return ok;
}

bool collect(const kpzlab::verify::TestResult& r, std::string& note) {
  return collect(std::vector<kpzlab::verify::TestResult>{r}, note);
}

}  // namespace

int main() {
  using namespace kpzlab;
  using namespace kpzlab::verify;
  const int workers = default_workers();
  int passed = 0;
  int total = 0;

  const auto run = [&](int id, const char* label, auto&& body) {
    std::string note;
    bool ok = false;
    try {
      ok = body(note);
    } catch (const std::exception& e) {
      ok = false;
      note = std::string("exception: ") + e.what();
    }
    ++total;
    if (ok) ++passed;
    std::printf("criterion %2d [%s] %s%s%s\n", id, ok ? "PASS" : "FAIL", label,
                note.empty() ? "" : " -- ", note.c_str());
    std::fflush(stdout);
  };

  run(1, "passage values match exhaustive enumeration", [&](std::string& note) {
    return collect(check_lpp_oracle(1000, kSeed, workers), note);
  });

  run(2, "metric composition and reverse triangle inequality", [&](std::string& note) {
    return collect(check_metric_composition(500, kSeed, workers), note);
  });

  run(3, "geodesic line ordering on every instance", [&](std::string& note) {
    return collect(check_geodesic_ordering(500, kSeed, workers), note);
  });

  run(4, "transform inequalities, conservation, and passage form", [&](std::string& note) {
    std::vector<TestResult> rs;
    rs.push_back(check_pitman_identities(500, kSeed, workers));
    rs.push_back(check_multi_start(300, kSeed, workers));
    return collect(rs, note);
  });

  run(5, "melon top line, ordering, and conservation", [&](std::string& note) {
    return collect(check_melon_correctness(30, kSeed, workers), note);
  });

  run(6, "narrow wedge evolution returns the top line bitwise", [&](std::string& note) {
    return collect(check_wedge_bitwise(50, kSeed, workers), note);
  });

  run(7, "evolved profiles look locally Brownian", [&](std::string& note) {
    if (!collect(check_calibration(kSeed, 0.01), note)) {
      note = "calibration gate: " + note;
      return false;
    }
    const ProfileBattery pb =
        check_evolved_profiles(100, 0.01, 200, 0.05, 1.8, 2.2, 0.01, kSeed, workers);
    return collect(pb.results, note);
  });

  run(8, "anchor deviations stabilize", [&](std::string& note) {
    std::vector<TestResult> rs;
    rs.push_back(check_stub_exactness(kSeed));
    rs.push_back(check_stabilization_frequency(200, 100, 0.01, kSeed, workers, 0.9));
    return collect(rs, note);
  });

  run(9, "evolution decomposes through line-to-point values", [&](std::string& note) {
    return collect(check_decomposition_deviation(100, 100, 0.01, kSeed, workers, 1e-6), note);
  });

  run(10, "one-step and two-step evolution agree in law", [&](std::string& note) {
    return collect(check_one_vs_two_step(500, 100, 0.01, kSeed, workers, 0.01), note);
  });

  run(11, "outputs are byte-identical across worker counts", [&](std::string& note) {
    const std::string a1 = to_json(run_algebraic_suite(kSeed, 1, 120)).dump();
    const std::string a2 = to_json(run_algebraic_suite(kSeed, 7, 120)).dump();
    if (a1 != a2) {
      note = "algebraic reports differ between 1 and 7 workers";
      return false;
    }
    const std::string s1 = to_json(check_exchange_symmetry(40, 50, 0.02, kSeed, 1, 0.01)).dump();
    const std::string s2 = to_json(check_exchange_symmetry(40, 50, 0.02, kSeed, 6, 0.01)).dump();
    if (s1 != s2) {
      note = "statistical reports differ between 1 and 6 workers";
      return false;
    }
    note = "reports byte-identical at 1, 6, 7 workers";
    return true;
  });

  std::printf("acceptance: %d/%d criteria passed\n", passed, total);
  return passed == total ? 0 : 1;
}
