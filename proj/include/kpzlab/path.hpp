#pragma once

#include <algorithm>
#include <vector>

#include "kpzlab/ensemble.hpp"

namespace kpzlab {

// Non-increasing cadlag path across a line ensemble, from (x, start_line) to
// (y, end_line) with end_line <= start_line. The path walks right along a line
// and jumps upward (to a smaller line index) at grid nodes. jump_nodes[r] is
// the node where the path leaves line start_line - r; the array is
// nondecreasing and has exactly start_line - end_line entries. Jump times are
// stored as node indices; real times are derived through the grid.
struct LatticePath {
  GridSpec grid;
  long start_node = 0;
  int start_line = 1;
  long end_node = 0;
  int end_line = 1;
  std::vector<long> jump_nodes;

  double x() const { return grid.node(start_node); }
  double y() const { return grid.node(end_node); }

  std::vector<double> jump_times() const {
    std::vector<double> t;
    t.reserve(jump_nodes.size());
    for (long j : jump_nodes) t.push_back(grid.node(j));
    return t;
  }

  // Line occupied just after time node j (cadlag convention); by definition
  // the value at the start node is start_line even if the path jumps there.
  int line_at(long node) const {
    if (node <= start_node) return start_line;
    long c = 0;
    while (c < static_cast<long>(jump_nodes.size()) && jump_nodes[static_cast<size_t>(c)] <= node)
      ++c;
    return start_line - static_cast<int>(c);
  }

  // Line occupied just before time node j (left limit).
  int line_before(long node) const {
    long c = 0;
    while (c < static_cast<long>(jump_nodes.size()) && jump_nodes[static_cast<size_t>(c)] < node)
      ++c;
    return start_line - static_cast<int>(c);
  }
};

// Total validity predicate: endpoint ordering, jump count, jump monotonicity
// and containment in [x, y].
inline bool validate_path(const LatticePath& p) {
  if (p.end_line > p.start_line) return false;
  if (p.start_node > p.end_node) return false;
  if (static_cast<long>(p.jump_nodes.size()) != p.start_line - p.end_line) return false;
  long prev = p.start_node;
  for (long j : p.jump_nodes) {
    if (j < prev || j > p.end_node) return false;
    prev = j;
  }
  return true;
}

// Path from real endpoints and jump times, all of which must lie on nodes.
inline LatticePath make_path(const GridSpec& grid, double x, int start_line, double y, int end_line,
                             const std::vector<double>& jump_times) {
  LatticePath p;
  p.grid = grid;
  p.start_node = grid.index_at(x);
  p.start_line = start_line;
  p.end_node = grid.index_at(y);
  p.end_line = end_line;
  p.jump_nodes.reserve(jump_times.size());
  for (double t : jump_times) p.jump_nodes.push_back(grid.index_at(t));
  if (!validate_path(p)) throw ValidationError("path: invalid jump structure");
  return p;
}

namespace detail {
inline void check_path_against(const LineEnsemble& f, const LatticePath& p) {
  if (!(p.grid == f.grid())) throw ValidationError("path length: path grid mismatches ensemble");
  if (!validate_path(p)) throw ValidationError("path length: invalid path");
  if (p.start_line > f.k() || p.end_line < 1)
    throw ValidationError("path length: line index out of range");
}
}  // namespace detail

// Path length as the telescoping sum of line increments between jumps.
inline double path_length(const LineEnsemble& f, const LatticePath& p) {
  detail::check_path_against(f, p);
  const int l = p.start_line, m = p.end_line;
  if (l == m) return f.value(m, p.end_node) - f.value(m, p.start_node);
  // t_i, the node where the path jumps from line i+1 to line i, is
  // jump_nodes[l-1-i] for i in [m, l-1].
  auto t = [&](int i) { return p.jump_nodes[static_cast<size_t>(l - 1 - i)]; };
  double total = f.value(m, p.end_node) - f.value(m, t(m));
  for (int i = m + 1; i <= l - 1; ++i) total += f.value(i, t(i - 1)) - f.value(i, t(i));
  total += f.value(l, t(l - 1)) - f.value(l, p.start_node);
  return total;
}

// Same quantity through the gap process: f_m(y) - f_l(x) - sum of gaps at the
// jump nodes. Agrees with path_length up to rounding.
inline double path_length_gap_form(const LineEnsemble& f, const LatticePath& p) {
  detail::check_path_against(f, p);
  const int l = p.start_line, m = p.end_line;
  double total = f.value(m, p.end_node) - f.value(l, p.start_node);
  for (int i = m; i <= l - 1; ++i) {
    const long ti = p.jump_nodes[static_cast<size_t>(l - 1 - i)];
    total -= f.value(i, ti) - f.value(i + 1, ti);
  }
  return total;
}

}  // namespace kpzlab
