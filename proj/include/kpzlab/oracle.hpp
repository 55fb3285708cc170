#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "kpzlab/ensemble.hpp"

// Brute-force reference implementations kept deliberately separate from the
// production code paths: no shared recurrence, no shared path bookkeeping.
// They exist so the fast implementations can be checked against arithmetic a
// reader can verify by hand.

namespace kpzlab::oracle {

// Last passage value computed as
//   f_m(y) - f_l(x) - min over jump tuples of sum_i (f_i(t_i) - f_{i+1}(t_i))
// with an odometer over nondecreasing jump tuples t_m >= ... >= t_{l-1}
// ordered as (t_{l-1}, ..., t_m) between the endpoint nodes.
inline double last_passage(const LineEnsemble& f, double x, int from_line, double y,
                           int to_line) {
  if (to_line < 1 || from_line > f.k() || to_line > from_line)
    throw DomainError("oracle: line indices out of range or misordered");
  const long ix = f.grid().index_at(x);
  const long iy = f.grid().index_at(y);
  if (ix > iy) throw DomainError("oracle: endpoints misordered");
  const int L = from_line - to_line;
  if (L == 0) return f.value(to_line, iy) - f.value(to_line, ix);

  std::vector<long> t(static_cast<size_t>(L), ix);
  double min_gap_sum = std::numeric_limits<double>::infinity();
  while (true) {
    double gap_sum = 0.0;
    for (int r = 0; r < L; ++r) {
      const long node = t[static_cast<size_t>(r)];
      const int line = from_line - 1 - r;  // gap crossed when leaving line + 1
      gap_sum += f.value(line, node) - f.value(line + 1, node);
    }
    min_gap_sum = std::min(min_gap_sum, gap_sum);
    int r = L - 1;
    while (r >= 0 && t[static_cast<size_t>(r)] == iy) --r;
    if (r < 0) break;
    ++t[static_cast<size_t>(r)];
    for (int s = r + 1; s < L; ++s) t[static_cast<size_t>(s)] = t[static_cast<size_t>(r)];
  }
  return f.value(to_line, iy) - f.value(from_line, ix) - min_gap_sum;
}

// max over start lines of offset + passage value to (y, 1).
inline double multi_start(const LineEnsemble& f, const std::vector<double>& offsets, double y) {
  if (offsets.empty() || static_cast<long>(offsets.size()) > f.k())
    throw ParameterError("oracle: offset count outside [1, k]");
  double best = -std::numeric_limits<double>::infinity();
  for (int l = 1; l <= static_cast<int>(offsets.size()); ++l)
    best = std::max(best, offsets[static_cast<size_t>(l - 1)] + last_passage(f, 0.0, l, y, 1));
  return best;
}

// Literal transform of a pair of lines: at each node the correction is the
// worst excess of f2 over f1 seen anywhere to the left, floored at zero. The
// prefix scan is recomputed from scratch per node.
struct PitmanPair {
  GridFunction top;
  GridFunction bottom;
};

// Scalar form of the same transform: the reflected top line at one node t,
// f1(t) plus the worst excess of f2 over f1 on [origin, t] floored at zero.
inline double pitman_top_at(const GridFunction& f1, const GridFunction& f2, double t) {
  if (!(f1.grid == f2.grid)) throw ValidationError("oracle: pitman pair needs a common grid");
  const long it = f1.grid.index_at(t);
  double excess = 0.0;
  for (long j = 0; j <= it; ++j) excess = std::max(excess, f2[j] - f1[j]);
  return f1[it] + excess;
}

inline PitmanPair pitman_pair(const GridFunction& f1, const GridFunction& f2) {
  if (!(f1.grid == f2.grid)) throw ValidationError("oracle: pitman pair needs a common grid");
  GridFunction top = f1, bottom = f2;
  const long n = f1.grid.count;
  for (long i = 0; i < n; ++i) {
    double excess = 0.0;
    for (long j = 0; j <= i; ++j) excess = std::max(excess, f2[j] - f1[j]);
    top[i] = f1[i] + excess;
    bottom[i] = f2[i] - excess;
  }
  return {top, bottom};
}

// max over listed nodes x of w(x) + s(x, y) for a caller-supplied kernel.
inline double variational_max(const std::vector<double>& xs, const std::vector<double>& ws,
                              double y, const std::function<double(double, double)>& s) {
  if (xs.size() != ws.size() || xs.empty())
    throw ParameterError("oracle: variational input sizes mismatch");
  double best = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < xs.size(); ++i) {
    const double w = ws[i];
    if (w == -std::numeric_limits<double>::infinity()) continue;
    best = std::max(best, w + s(xs[i], y));
  }
  return best;
}

}  // namespace kpzlab::oracle
