#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <kpzlab/kpzlab.hpp>

// Command line front end. Exit codes: 0 success, 1 verification failures,
// 2 invalid arguments or malformed input, 3 resource limits, 4 initial
// conditions that grow too fast for the requested time.
namespace kpzlab::cli {

namespace detail {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

inline Range parse_range(const std::string& text) {
  const auto at = text.find(':');
  if (at == std::string::npos)
    throw ParameterError("range: expected lo:hi, got '" + text + "'");
  Range r;
  try {
    r.lo = std::stod(text.substr(0, at));
    r.hi = std::stod(text.substr(at + 1));
  } catch (const std::exception&) {
    throw ParameterError("range: expected lo:hi, got '" + text + "'");
  }
  if (!(r.lo <= r.hi)) throw ParameterError("range: needs lo <= hi, got '" + text + "'");
  return r;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ParameterError("io: cannot create directory '" + dir + "': " + ec.message());
}

inline std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline std::string load_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("io: cannot open '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void print_result_line(const verify::TestResult& r) {
  std::printf("[%s] %-28s n=%-6ld stat=%-12.6g p=%-10.4g %s\n", r.pass ? "PASS" : "FAIL",
              r.test.c_str(), r.n, r.statistic, r.p_value, r.detail.c_str());
}

inline void print_suite(const verify::SuiteReport& r) {
  std::printf("suite %s (seed %llu)\n", r.suite.c_str(),
              static_cast<unsigned long long>(r.seed));
  for (const auto& t : r.results) print_result_line(t);
  std::printf("suite %s: %s\n", r.suite.c_str(), r.all_passed() ? "all passed" : "FAILURES");
}

inline std::string samples_csv(const std::vector<double>& xs, const std::string& name) {
  std::ostringstream out;
  out << "sample," << name << "\n";
  for (size_t j = 0; j < xs.size(); ++j)
    out << j << "," << kpzlab::detail::num17(xs[j]) << "\n";
  return out.str();
}

}  // namespace detail

struct SimulateOptions {
  std::uint64_t seed = 12345;
  long n = 100;
  long lines = 5;
  double step = 0.01;
  std::string y_range = "-1:1";
  std::string out;
};

struct EvolveOptions {
  std::uint64_t seed = 12345;
  long n = 100;
  double step = 0.01;
  double t = 1.0;
  std::string ic = "narrow-wedge";
  std::string y_range = "-1:1";
  std::string out;
};

struct VerifyOptions {
  std::uint64_t seed = 12345;
  std::string suite = "all";
  long replicas = 200;
  long instances = 1000;
  long workers = default_workers();
  std::string out;
};

struct PlotdataOptions {
  std::string from;
  std::string out;
};

inline int cmd_simulate(const SimulateOptions& o) {
  const auto yr = detail::parse_range(o.y_range);
  if (yr.hi < 0.0)
    throw ParameterError("simulate: the coordinate range must contain a nonnegative point");
  if (o.lines < 1) throw ParameterError("simulate: needs at least one line");
  detail::ensure_dir(o.out);

  const long depth = std::min(o.lines, o.n);
  const SheetApprox s =
      build_sheet_approx(o.n, depth, 0.0, yr.lo, yr.hi, o.step,
                         RngStream{o.seed, purpose_stream("cli-simulate", 0)}, o.lines);

  const nlohmann::json config = {{"command", "simulate"}, {"seed", o.seed},  {"n", o.n},
                                 {"lines", o.lines},      {"step", o.step},  {"y_lo", yr.lo},
                                 {"y_hi", yr.hi}};
  nlohmann::json meta = config;
  meta["delta"] = s.delta;
  meta["grid"] = grid_json(s.y_grid());
  meta["lines_kept"] = s.scaled.k();
  meta["config_hash"] = config_hash(config);
  save_text(detail::join(o.out, "ensemble.csv"), ensemble_csv(s.scaled));
  save_json(detail::join(o.out, "meta.json"), meta);
  std::printf("wrote %s (%ld lines, %ld nodes, delta=%.6g)\n",
              detail::join(o.out, "ensemble.csv").c_str(), s.scaled.k(), s.y_grid().count,
              s.delta);
  return 0;
}

inline int cmd_evolve(const EvolveOptions& o) {
  const auto yr = detail::parse_range(o.y_range);
  const InitialCondition h0 = parse_ic(o.ic);
  detail::ensure_dir(o.out);

  const FinitaryReport fin = is_finitary(h0, o.t);
  if (!fin.finitary) {
    std::ostringstream msg;
    msg << "evolve: the initial condition grows too fast for t=" << o.t
        << "; tail ratios (h0(x) - x^2/t)/|x| are " << fin.ratio_left << " (left) and "
        << fin.ratio_right << " (right), both must be below 0";
    throw NotFinitaryError(msg.str());
  }

  const double t23 = std::cbrt(o.t) * std::cbrt(o.t);
  const auto [wl, wr] = restriction_window(h0, o.t, yr.lo, yr.hi);
  const double gamma = std::max(0.0, -wl / t23);
  const double v_lo = yr.lo / t23 + gamma;
  const double v_hi = yr.hi / t23 + gamma;
  const double margin = 12.0 * o.step;
  const double n13 = std::cbrt(static_cast<double>(o.n));
  const double sheet_y_lo = v_lo - margin;
  const double sheet_y_hi = std::max(v_hi, 0.0) + margin;
  const double x_wanted = std::max(0.0, wr / t23 + gamma) + margin;
  const double x_hi = std::min(x_wanted, 0.5 * n13 + sheet_y_hi - margin);

  const SheetApprox s =
      build_sheet_approx(o.n, 1, x_hi, sheet_y_lo, sheet_y_hi, o.step,
                         RngStream{o.seed, purpose_stream("cli-evolve", 0)}, 3);
  const EvolveResult res = evolve_detailed(h0, o.t, s, yr.lo, yr.hi);

  const nlohmann::json config = {{"command", "evolve"}, {"seed", o.seed}, {"n", o.n},
                                 {"step", o.step},      {"t", o.t},       {"ic", o.ic},
                                 {"y_lo", yr.lo},       {"y_hi", yr.hi}};
  nlohmann::json meta = config;
  meta["window_left"] = res.window_left;
  meta["window_right"] = res.window_right;
  meta["gamma"] = res.gamma;
  meta["truncated"] = res.truncated;
  meta["truncated_span"] = res.truncated_span;
  meta["grid"] = grid_json(res.h.grid);
  meta["config_hash"] = config_hash(config);
  save_text(detail::join(o.out, "profile.csv"), grid_function_csv(res.h, "height"));
  save_json(detail::join(o.out, "meta.json"), meta);
  std::printf("wrote %s (%ld nodes, window [%.4g, %.4g], gamma=%.4g%s)\n",
              detail::join(o.out, "profile.csv").c_str(), res.h.grid.count, res.window_left,
              res.window_right, res.gamma, res.truncated ? ", truncated" : "");
  return 0;
}

inline int cmd_verify(const VerifyOptions& o) {
  detail::ensure_dir(o.out);
  nlohmann::json suites = nlohmann::json::array();
  bool ok = true;
  std::vector<double> qv;

  if (o.suite == "all" || o.suite == "algebraic") {
    const verify::SuiteReport r =
        verify::run_algebraic_suite(o.seed, static_cast<int>(o.workers), o.instances);
    detail::print_suite(r);
    ok = ok && r.all_passed();
    suites.push_back(verify::to_json(r));
  }
  if (o.suite == "all" || o.suite == "statistical") {
    const verify::SuiteReport r =
        verify::run_statistical_suite(o.seed, static_cast<int>(o.workers), o.replicas, &qv);
    detail::print_suite(r);
    ok = ok && r.all_passed();
    suites.push_back(verify::to_json(r));
  }

  const nlohmann::json report = {{"seed", o.seed}, {"suites", suites}};
  save_json(detail::join(o.out, "report.json"), report);
  if (!qv.empty())
    save_text(detail::join(o.out, "qv_samples.csv"),
              detail::samples_csv(qv, "quadratic_variation"));
  std::printf("%s\n", ok ? "all suites passed" : "verification failures present");
  return ok ? 0 : 1;
}

inline int cmd_plotdata(const PlotdataOptions& o) {
  namespace fs = std::filesystem;
  const std::string ens_path = detail::join(o.from, "ensemble.csv");
  const std::string prof_path = detail::join(o.from, "profile.csv");
  const std::string report_path = detail::join(o.from, "report.json");
  const std::string qv_path = detail::join(o.from, "qv_samples.csv");
  const bool has_ens = fs::exists(ens_path);
  const bool has_prof = fs::exists(prof_path);
  const bool has_report = fs::exists(report_path);
  const bool has_qv = fs::exists(qv_path);
  if (!has_ens && !has_prof && !has_report && !has_qv)
    throw ParameterError("plotdata: no recognized artifacts in '" + o.from +
                         "' (looked for ensemble.csv, profile.csv, report.json, qv_samples.csv)");
  detail::ensure_dir(o.out);

  std::ostringstream plot;
  plot << "# gnuplot script; run from this directory\n"
       << "set datafile separator ','\n"
       << "set key autotitle columnheader\n"
       << "set terminal pngcairo size 1100,700\n";
  std::vector<std::string> wrote;

  long line_count = 0;
  if (has_ens) {
    const std::string text = detail::load_text(ens_path);
    std::istringstream in(text);
    std::string header;
    std::getline(in, header);
    const auto cols = kpzlab::detail::split_csv_line(header);
    if (cols.size() < 2 || cols[0] != "coordinate")
      throw ValidationError("plotdata: ensemble.csv has an unexpected header");
    line_count = static_cast<long>(cols.size()) - 1;
    std::ostringstream longform;
    longform << "coordinate,line,value\n";
    std::string row;
    while (std::getline(in, row)) {
      if (row.empty()) continue;
      const auto cells = kpzlab::detail::split_csv_line(row);
      if (cells.size() != cols.size())
        throw ValidationError("plotdata: ensemble.csv row width differs from the header");
      for (size_t j = 1; j < cells.size(); ++j)
        longform << cells[0] << "," << j << "," << cells[j] << "\n";
    }
    save_text(detail::join(o.out, "lines.csv"), longform.str());
    save_text(detail::join(o.out, "ensemble.csv"), text);
    wrote.push_back("lines.csv");
    plot << "\nset output 'lines.png'\n"
         << "set xlabel 'coordinate'\n"
         << "set ylabel 'line value'\n"
         << "plot for [i=2:" << (line_count + 1) << "] 'ensemble.csv' using 1:i with lines\n";
  }
  if (has_prof) {
    save_text(detail::join(o.out, "profile.csv"), detail::load_text(prof_path));
    wrote.push_back("profile.csv");
    plot << "\nset output 'profile.png'\n"
         << "set xlabel 'y'\n"
         << "set ylabel 'height'\n"
         << "plot 'profile.csv' using 1:2 with lines\n";
  }
  if (has_report) {
    nlohmann::json report;
    try {
      report = nlohmann::json::parse(detail::load_text(report_path));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("plotdata: report.json is not valid JSON: ") + e.what());
    }
    std::ostringstream tests;
    tests << "suite,test,n,statistic,p_value,pass\n";
    for (const auto& suite : report.value("suites", nlohmann::json::array()))
      for (const auto& t : suite.value("results", nlohmann::json::array()))
        tests << suite.value("suite", std::string("?")) << ","
              << t.value("test", std::string("?")) << "," << t.value("n", 0L) << ","
              << kpzlab::detail::num17(t.value("statistic", 0.0)) << ","
              << kpzlab::detail::num17(t.value("p_value", 0.0)) << ","
              << (t.value("pass", false) ? 1 : 0) << "\n";
    save_text(detail::join(o.out, "tests.csv"), tests.str());
    wrote.push_back("tests.csv");
  }
  if (has_qv) {
    std::istringstream in(detail::load_text(qv_path));
    std::string row;
    std::getline(in, row);
    std::vector<double> xs;
    while (std::getline(in, row)) {
      if (row.empty()) continue;
      const auto cells = kpzlab::detail::split_csv_line(row);
      if (cells.size() != 2)
        throw ValidationError("plotdata: qv_samples.csv rows need 2 columns");
      xs.push_back(kpzlab::detail::parse_value(cells[1]));
    }
    if (xs.empty()) throw ValidationError("plotdata: qv_samples.csv has no samples");
    const auto [mn_it, mx_it] = std::minmax_element(xs.begin(), xs.end());
    const double mn = *mn_it;
    const double mx = *mx_it;
    const long bins = std::max<long>(1, std::min<long>(24, static_cast<long>(xs.size()) / 5));
    const double width = (mx > mn) ? (mx - mn) / static_cast<double>(bins) : 1.0;
    std::vector<long> counts(static_cast<size_t>(bins), 0);
    for (const double x : xs) {
      long b = (mx > mn) ? static_cast<long>((x - mn) / width) : 0;
      b = std::clamp<long>(b, 0, bins - 1);
      ++counts[static_cast<size_t>(b)];
    }
    std::ostringstream hist;
    hist << "bin_left,bin_right,count\n";
    for (long b = 0; b < bins; ++b)
      hist << kpzlab::detail::num17(mn + width * static_cast<double>(b)) << ","
           << kpzlab::detail::num17(mn + width * static_cast<double>(b + 1)) << ","
           << counts[static_cast<size_t>(b)] << "\n";
    save_text(detail::join(o.out, "qv_hist.csv"), hist.str());
    wrote.push_back("qv_hist.csv");
    plot << "\nset output 'qv_hist.png'\n"
         << "set xlabel 'quadratic variation'\n"
         << "set ylabel 'count'\n"
         << "set style fill solid 0.6\n"
         << "plot 'qv_hist.csv' using (($1+$2)/2):3 with boxes\n";
  }

  save_text(detail::join(o.out, "plot.txt"), plot.str());
  wrote.push_back("plot.txt");
  std::ostringstream names;
  for (size_t j = 0; j < wrote.size(); ++j) names << (j ? ", " : "") << wrote[j];
  std::printf("wrote %s in %s\n", names.str().c_str(), o.out.c_str());
  return 0;
}

inline int run(std::vector<std::string> args) {
  CLI::App app{"Simulation and verification toolkit for last passage percolation,"
               " melons, and variational growth evolution"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI or TOML file");
  app.get_config_ptr()->configurable(false);

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "Sample a melon and write its rescaled lines");
  c_sim->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  c_sim->add_option("--n", sim.n, "Melon size")->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_sim->add_option("--lines", sim.lines, "Rescaled lines to keep")
      ->check(CLI::PositiveNumber)->capture_default_str();
  c_sim->add_option("--step", sim.step, "Target spatial resolution")
      ->check(CLI::PositiveNumber)->capture_default_str();
  c_sim->add_option("--y-range", sim.y_range, "Coordinate range lo:hi")->capture_default_str();
  c_sim->add_option("--out", sim.out, "Output directory")->required();

  EvolveOptions evo;
  auto* c_evo = app.add_subcommand("evolve", "Evolve an initial condition to time t");
  c_evo->add_option("--seed", evo.seed, "Random seed")->capture_default_str();
  c_evo->add_option("--n", evo.n, "Melon size behind the kernel approximation")
      ->check(CLI::PositiveNumber)->capture_default_str();
  c_evo->add_option("--step", evo.step, "Target spatial resolution")
      ->check(CLI::PositiveNumber)->capture_default_str();
  c_evo->add_option("--t", evo.t, "Evolution time")->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_evo->add_option("--ic", evo.ic,
                    "Initial condition: flat, narrow-wedge[:a], parabola[:c], or a CSV path")
      ->capture_default_str();
  c_evo->add_option("--y-range", evo.y_range, "Evaluation range lo:hi")->capture_default_str();
  c_evo->add_option("--out", evo.out, "Output directory")->required();

  VerifyOptions ver;
  auto* c_ver = app.add_subcommand("verify", "Run the verification suites");
  c_ver->add_option("--seed", ver.seed, "Random seed")->capture_default_str();
  c_ver->add_option("--suite", ver.suite, "Which suites to run")
      ->check(CLI::IsMember({"all", "algebraic", "statistical"}))->capture_default_str();
  c_ver->add_option("--replicas", ver.replicas, "Replicas per statistical battery")
      ->check(CLI::PositiveNumber)->capture_default_str();
  c_ver->add_option("--instances", ver.instances, "Instances for the passage value oracle")
      ->check(CLI::PositiveNumber)->capture_default_str();
  c_ver->add_option("--workers", ver.workers, "Worker threads (results do not depend on this)")
      ->check(CLI::Range(1L, 64L))->capture_default_str();
  c_ver->add_option("--out", ver.out, "Output directory")->required();

  PlotdataOptions pd;
  auto* c_pd = app.add_subcommand("plotdata", "Turn saved artifacts into plot-ready tables");
  c_pd->add_option("--from", pd.from, "Directory holding simulate/evolve/verify outputs")
      ->required();
  c_pd->add_option("--out", pd.out, "Output directory")->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_evo->parsed()) return cmd_evolve(evo);
    if (c_ver->parsed()) return cmd_verify(ver);
    return cmd_plotdata(pd);
  } catch (const NotFinitaryError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const ResourceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const kpzlab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args));
}

}  // namespace kpzlab::cli
