#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "kpzlab/path.hpp"

namespace kpzlab {

// Weight source for the passage DP: a path may begin at (node, line) with the
// given initial weight. Plain point-to-point queries use one source of weight
// zero; variational sums over an initial condition use many.
struct DpSource {
  int line;
  long node;
  double weight;
};

namespace detail {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Dense value table for paths from a source set to (node i, line j), with
// lines running top..bottom = [line_lo, line_hi] and nodes [i_lo, i_hi].
//
// Recurrence, evaluated bottom line first and left to right:
//   v(j,i) = max( v(j,i-1) + f_j(x_i) - f_j(x_{i-1}),   walk on line j
//                 v(j+1,i),                             jump up at node i
//                 source weight at (j,i) if any )
// Ties are exact float equalities; the fixed evaluation order makes geodesic
// extraction reproducible.
struct DpTable {
  int line_lo = 1;
  int line_hi = 1;
  long i_lo = 0;
  long i_hi = 0;
  std::vector<double> v;

  long width() const { return i_hi - i_lo + 1; }
  double& at(int j, long i) {
    return v[static_cast<size_t>(j - line_lo) * static_cast<size_t>(width()) +
             static_cast<size_t>(i - i_lo)];
  }
  double at(int j, long i) const {
    return v[static_cast<size_t>(j - line_lo) * static_cast<size_t>(width()) +
             static_cast<size_t>(i - i_lo)];
  }
};

inline DpTable dp_sweep(const LineEnsemble& f, int line_lo, int line_hi, long i_lo, long i_hi,
                        const std::vector<DpSource>& sources) {
  if (line_lo < 1 || line_hi > f.k() || line_lo > line_hi)
    throw DomainError("passage: line range out of bounds");
  if (i_lo < 0 || i_hi >= f.grid().count || i_lo > i_hi)
    throw DomainError("passage: node range out of bounds");
  DpTable T;
  T.line_lo = line_lo;
  T.line_hi = line_hi;
  T.i_lo = i_lo;
  T.i_hi = i_hi;
  const long W = T.width();
  T.v.assign(static_cast<size_t>(line_hi - line_lo + 1) * static_cast<size_t>(W), kNegInf);
  for (const DpSource& s : sources) {
    if (s.line < line_lo || s.line > line_hi || s.node < i_lo || s.node > i_hi)
      throw DomainError("passage: source outside DP window");
  }
  for (int j = line_hi; j >= line_lo; --j) {
    const double* fj = f.line(j).values.data();
    for (long i = i_lo; i <= i_hi; ++i) {
      double best = kNegInf;
      if (i > i_lo) best = T.at(j, i - 1) + (fj[i] - fj[i - 1]);
      if (j < line_hi) best = std::max(best, T.at(j + 1, i));
      T.at(j, i) = best;
    }
    for (const DpSource& s : sources) {
      if (s.line != j) continue;
      if (s.weight > T.at(j, s.node)) {
        T.at(j, s.node) = s.weight;
        // Re-propagate the walk to the right of the improved node.
        for (long i = s.node + 1; i <= i_hi; ++i) {
          const double walked = T.at(j, i - 1) + (fj[i] - fj[i - 1]);
          if (walked > T.at(j, i))
            T.at(j, i) = walked;
          else
            break;
        }
      }
    }
  }
  return T;
}

inline void check_query(const LineEnsemble& f, int from_line, int to_line) {
  if (to_line < 1 || from_line > f.k() || to_line > from_line)
    throw DomainError("passage: line indices out of range or misordered");
}

enum class TiePolicy { PreferJump, PreferWalk };

// Backtracks one optimal path from (end_node, line_lo) to the single source
// at (start_node, line_hi). PreferJump yields nodewise-maximal jump times
// (rightmost path), PreferWalk nodewise-minimal ones (leftmost path).
inline LatticePath backtrack(const LineEnsemble& f, const DpTable& T, long start_node,
                             long end_node, TiePolicy policy) {
  LatticePath p;
  p.grid = f.grid();
  p.start_node = start_node;
  p.start_line = T.line_hi;
  p.end_node = end_node;
  p.end_line = T.line_lo;
  std::vector<long> rev;  // jumps in backtrack order, topmost transition first
  int j = T.line_lo;
  long i = end_node;
  while (j < T.line_hi || i > start_node) {
    const double* fj = f.line(j).values.data();
    const bool can_jump = j < T.line_hi && T.at(j, i) == T.at(j + 1, i);
    const bool can_walk =
        i > start_node && T.at(j, i) == T.at(j, i - 1) + (fj[i] - fj[i - 1]);
    if ((policy == TiePolicy::PreferJump && can_jump) || !can_walk) {
      if (!can_jump) throw Error("passage: backtrack lost the optimal path");
      rev.push_back(i);  // leaves line j+1 at node i
      ++j;
    } else {
      --i;
    }
  }
  p.jump_nodes.assign(rev.rbegin(), rev.rend());
  return p;
}

}  // namespace detail

// Last passage value over non-increasing cadlag paths from (x, from_line) to
// (y, to_line): the maximal path length across the ensemble.
inline double last_passage_value(const LineEnsemble& f, double x, int from_line, double y,
                                 int to_line) {
  detail::check_query(f, from_line, to_line);
  const long ix = f.grid().index_at(x);
  const long iy = f.grid().index_at(y);
  if (ix > iy) throw DomainError("passage: endpoints misordered");
  auto T = detail::dp_sweep(f, to_line, from_line, ix, iy, {{from_line, ix, 0.0}});
  return T.at(to_line, iy);
}

// Values f[(x,from_line) -> (y,to_line)] for every node y in [y_lo, y_hi]
// (clamped below to x), as a function of y.
inline GridFunction last_passage_profile(const LineEnsemble& f, double x, int from_line,
                                         int to_line, double y_lo, double y_hi) {
  detail::check_query(f, from_line, to_line);
  const GridSpec& g = f.grid();
  const long ix = g.index_at(x);
  long ia = g.index_at(std::max(x, y_lo));
  const long ib = g.index_at(y_hi);
  if (ia > ib) throw DomainError("passage: empty profile range");
  auto T = detail::dp_sweep(f, to_line, from_line, ix, ib, {{from_line, ix, 0.0}});
  GridSpec sub = GridSpec::from_count(g.node(ia), g.step, ib - ia + 1);
  GridFunction out = GridFunction::zero(sub);
  for (long i = ia; i <= ib; ++i) out[i - ia] = T.at(to_line, i);
  return out;
}

// Optimal path with nodewise-maximal jump times.
inline LatticePath rightmost_geodesic(const LineEnsemble& f, double x, int from_line, double y,
                                      int to_line) {
  detail::check_query(f, from_line, to_line);
  const long ix = f.grid().index_at(x), iy = f.grid().index_at(y);
  if (ix > iy) throw DomainError("passage: endpoints misordered");
  auto T = detail::dp_sweep(f, to_line, from_line, ix, iy, {{from_line, ix, 0.0}});
  return detail::backtrack(f, T, ix, iy, detail::TiePolicy::PreferJump);
}

// Optimal path with nodewise-minimal jump times.
inline LatticePath leftmost_geodesic(const LineEnsemble& f, double x, int from_line, double y,
                                     int to_line) {
  detail::check_query(f, from_line, to_line);
  const long ix = f.grid().index_at(x), iy = f.grid().index_at(y);
  if (ix > iy) throw DomainError("passage: endpoints misordered");
  auto T = detail::dp_sweep(f, to_line, from_line, ix, iy, {{from_line, ix, 0.0}});
  return detail::backtrack(f, T, ix, iy, detail::TiePolicy::PreferWalk);
}

// Value of the best path through the fixed waypoint (z, mid_line).
inline double compose_values(const LineEnsemble& f, double x, int from_line, double z,
                             int mid_line, double y, int to_line) {
  if (mid_line > from_line || mid_line < to_line)
    throw DomainError("passage: waypoint line outside [to_line, from_line]");
  return last_passage_value(f, x, from_line, z, mid_line) +
         last_passage_value(f, z, mid_line, y, to_line);
}

// max over start lines l of offsets[l-1] + f[(0,l) -> (y,1)]. The origin and
// y must be grid nodes with y >= 0.
inline double multi_start_value(const LineEnsemble& f, const std::vector<double>& offsets,
                                double y) {
  const long k = static_cast<long>(offsets.size());
  if (k < 1 || k > f.k()) throw ParameterError("multi start: offset count outside [1, k]");
  const long i0 = f.grid().index_at(0.0);
  const long iy = f.grid().index_at(y);
  if (iy < i0) throw DomainError("multi start: y must be >= 0");
  std::vector<DpSource> sources;
  sources.reserve(static_cast<size_t>(k));
  for (int l = 1; l <= k; ++l) sources.push_back({l, i0, offsets[static_cast<size_t>(l - 1)]});
  auto T = detail::dp_sweep(f, 1, static_cast<int>(k), i0, iy, sources);
  return T.at(1, iy);
}

struct EnumerationResult {
  double value = detail::kNegInf;
  std::vector<std::vector<long>> optimal_jump_nodes;  // all argmax jump tuples
  double paths_enumerated = 0;
};

// Brute-force reference: enumerates every nondecreasing jump tuple and
// maximizes the telescoped path length. Refuses instances with more than
// max_paths paths.
inline EnumerationResult enumerate_oracle(const LineEnsemble& f, double x, int from_line,
                                          double y, int to_line, double max_paths = 1e7) {
  detail::check_query(f, from_line, to_line);
  const long ix = f.grid().index_at(x), iy = f.grid().index_at(y);
  if (ix > iy) throw DomainError("passage: endpoints misordered");
  const long L = from_line - to_line;
  const double N = static_cast<double>(iy - ix + 1);
  double count = 1.0;
  for (long r = 1; r <= L; ++r) count = count * (N + static_cast<double>(L - r)) / static_cast<double>(r);
  if (count > max_paths) throw ResourceError("enumeration: path count exceeds budget");

  EnumerationResult res;
  LatticePath p;
  p.grid = f.grid();
  p.start_node = ix;
  p.start_line = from_line;
  p.end_node = iy;
  p.end_line = to_line;
  std::vector<long> t(static_cast<size_t>(L), ix);
  while (true) {
    p.jump_nodes = t;
    const double v = path_length(f, p);
    res.paths_enumerated += 1;
    if (v > res.value) {
      res.value = v;
      res.optimal_jump_nodes.clear();
      res.optimal_jump_nodes.push_back(t);
    } else if (v == res.value) {
      res.optimal_jump_nodes.push_back(t);
    }
    if (L == 0) break;
    long r = L - 1;
    while (r >= 0 && t[static_cast<size_t>(r)] == iy) --r;
    if (r < 0) break;
    ++t[static_cast<size_t>(r)];
    for (long s = r + 1; s < L; ++s) t[static_cast<size_t>(s)] = t[static_cast<size_t>(r)];
  }
  return res;
}

}  // namespace kpzlab
