#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpzlab/kpz.hpp"
#include "kpzlab/rng.hpp"

namespace kpzlab {

namespace detail {

inline std::string num17(double x) {
  if (x == -std::numeric_limits<double>::infinity()) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_value(const std::string& s) {
  const char* p = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(p, &end);
  if (end == p) throw ValidationError("csv: unparseable number '" + s + "'");
  return v;
}

}  // namespace detail

inline std::string ensemble_csv(const LineEnsemble& f) {
  std::ostringstream out;
  out << "coordinate";
  for (long i = 1; i <= f.k(); ++i) out << ",line_" << i;
  out << "\n";
  for (long j = 0; j < f.grid().count; ++j) {
    out << detail::num17(f.grid().node(j));
    for (long i = 1; i <= f.k(); ++i) out << "," << detail::num17(f.value(i, j));
    out << "\n";
  }
  return out.str();
}

inline nlohmann::json grid_json(const GridSpec& g) {
  return {{"left", g.left}, {"right", g.right}, {"step", g.step}, {"count", g.count}};
}

inline nlohmann::json ensemble_json(const LineEnsemble& f) {
  nlohmann::json lines = nlohmann::json::array();
  for (long i = 1; i <= f.k(); ++i) lines.push_back(f.line(i).values);
  return {{"grid", grid_json(f.grid())}, {"lines", lines}};
}

inline std::string grid_function_csv(const GridFunction& f,
                                     const std::string& value_name = "value") {
  std::ostringstream out;
  out << "coordinate," << value_name << "\n";
  for (long j = 0; j < f.grid.count; ++j)
    out << detail::num17(f.grid.node(j)) << "," << detail::num17(f[j]) << "\n";
  return out.str();
}

inline nlohmann::json grid_function_json(const GridFunction& f) {
  return {{"grid", grid_json(f.grid)}, {"values", f.values}};
}

inline std::string path_csv(const LatticePath& p) {
  std::ostringstream out;
  out << "node,coordinate,line\n";
  for (long j = p.start_node; j <= p.end_node; ++j)
    out << j << "," << detail::num17(p.grid.node(j)) << "," << p.line_at(j) << "\n";
  return out.str();
}

inline nlohmann::json path_json(const LatticePath& p) {
  return {{"grid", grid_json(p.grid)},
          {"start_node", p.start_node},
          {"start_line", p.start_line},
          {"end_node", p.end_node},
          {"end_line", p.end_line},
          {"jump_nodes", p.jump_nodes}};
}

// Initial conditions round-trip through two-column CSV with -inf marking
// points outside the support.
inline std::string ic_csv(const GridIc& ic) {
  std::ostringstream out;
  out << "x,h0\n";
  for (long j = 0; j < ic.grid.count; ++j)
    out << detail::num17(ic.grid.node(j)) << "," << detail::num17(ic.values[static_cast<size_t>(j)])
        << "\n";
  return out.str();
}

inline InitialCondition ic_from_csv(std::istream& in) {
  std::vector<double> xs, vs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 2) throw ValidationError("csv: initial condition rows need 2 columns");
    if (xs.empty() && (cells[0] == "x" || cells[0] == "coordinate")) continue;
    xs.push_back(detail::parse_value(cells[0]));
    vs.push_back(detail::parse_value(cells[1]));
  }
  if (xs.size() < 2) throw ValidationError("csv: initial condition needs at least 2 rows");
  const double step = xs[1] - xs[0];
  if (!(step > 0.0)) throw ValidationError("csv: coordinates must increase");
  for (size_t j = 1; j < xs.size(); ++j)
    if (std::fabs(xs[j] - xs[j - 1] - step) > 1e-9 * step)
      throw ValidationError("csv: coordinates must be uniformly spaced");
  return InitialCondition::from_grid(
      GridSpec::from_count(xs[0], step, static_cast<long>(xs.size())), std::move(vs));
}

inline InitialCondition ic_from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("csv: cannot open '" + path + "'");
  return ic_from_csv(in);
}

// Accepts "flat", "narrow-wedge", "narrow-wedge:a", "parabola", "parabola:c"
// ('@' works as the separator too), or a path to a CSV file.
inline InitialCondition parse_ic(const std::string& text) {
  if (text.size() > 4 && text.substr(text.size() - 4) == ".csv") return ic_from_csv_file(text);
  const auto at = text.find_first_of(":@");
  const std::string name = text.substr(0, at);
  double param = 0.0;
  bool has_param = false;
  if (at != std::string::npos) {
    param = detail::parse_value(text.substr(at + 1));
    has_param = true;
  }
  if (name == "flat" && !has_param) return InitialCondition::flat();
  if (name == "narrow-wedge") return InitialCondition::narrow_wedge(has_param ? param : 0.0);
  if (name == "parabola") return InitialCondition::parabola(has_param ? param : 1.0);
  throw ParameterError("initial condition: unknown spec '" + text + "'");
}

inline void save_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("io: cannot open '" + path + "' for writing");
  out << content;
}

inline void save_json(const std::string& path, const nlohmann::json& j) {
  save_text(path, j.dump(2) + "\n");
}

// Stable hex digest of a configuration object, used to stamp reports.
inline std::string config_hash(const nlohmann::json& config) {
  const std::uint64_t h = fnv1a64(config.dump());
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace kpzlab
