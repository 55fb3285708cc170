#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "kpzlab/ensemble.hpp"
#include "kpzlab/sampler.hpp"

namespace kpzlab {

struct TransformedPair {
  GridFunction top;
  GridFunction bottom;
};

// Skorokhod reflection of two lines from the left end of their grid: with
// G(t) the running maximum of (f2 - f1)+ from the origin,
//   Wf1 = f1 + G,  Wf2 = f2 - G.
// The pair is ordered (top >= bottom) and the nodewise sum is preserved.
inline TransformedPair pitman_pair(const GridFunction& f1, const GridFunction& f2) {
  if (!(f1.grid == f2.grid)) throw DomainError("pitman: lines on mismatched grids");
  TransformedPair out{f1, f2};
  double run = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < f1.grid.count; ++i) {
    run = std::max(run, f2[i] - f1[i]);
    const double g = std::max(run, 0.0);
    out.top[i] = f1[i] + g;
    out.bottom[i] = f2[i] - g;
  }
  return out;
}

namespace detail {

// One in-place reflection gate on an adjacent pair; returns whether any node
// moved. Written so a converged pair is recognized exactly (g stays 0.0).
inline bool reflect_adjacent(GridFunction& a, GridFunction& b) {
  double run = -std::numeric_limits<double>::infinity();
  bool moved = false;
  for (long i = 0; i < a.grid.count; ++i) {
    run = std::max(run, b[i] - a[i]);
    const double g = std::max(run, 0.0);
    if (g > 0.0) {
      a[i] += g;
      b[i] -= g;
      moved = true;
    }
  }
  return moved;
}

}  // namespace detail

// Full melon: repeated bottom-to-top sweeps of adjacent reflection gates until
// a sweep is a no-op. Sweeping upward nests the reflections so that passage
// weight drains toward line 1; the result is nodewise ordered, preserves the
// nodewise sum of the input, and its top line equals the last passage value
// from (origin, k) to (t, 1) in the input ensemble at every node.
inline LineEnsemble melon(const LineEnsemble& f) {
  for (long i = 1; i <= f.k(); ++i)
    if (f.value(i, 0) != 0.0) throw DomainError("melon: all lines must start at zero");
  LineEnsemble w = f;
  const long k = w.k();
  if (k == 1) return w;
  const long max_sweeps = 2 * k + 8;
  for (long sweep = 0; sweep < max_sweeps; ++sweep) {
    bool moved = false;
    for (long i = k - 1; i >= 1; --i)
      if (detail::reflect_adjacent(w.line(i), w.line(i + 1))) moved = true;
    if (!moved) return w;
  }
  throw Error("melon: reflection sweeps failed to order the ensemble");
}

// Melon of n standard motions under the edge scaling: line i of the result is
//   A_i(y) = n^{1/6} * (W_i(1 + 2 y n^{-1/3}) - 2 sqrt(n) - 2 y n^{1/6})
// evaluated on y_grid. keep = 0 keeps all n lines, otherwise the top
// min(keep, n) lines. The underlying time grid spans [0, T_max] with a 10%
// margin past the largest mapped time, at a resolution matching y_grid.step.
inline LineEnsemble rescaled_melon(long n, const GridSpec& y_grid, RngStream rng, long keep = 0) {
  if (n < 1) throw ParameterError("rescaled melon: n must be >= 1");
  const double n13 = std::cbrt(static_cast<double>(n));
  const double n16 = std::sqrt(n13);
  const double tau_lo = 1.0 + 2.0 * y_grid.left / n13;
  const double tau_hi = 1.0 + 2.0 * y_grid.right / n13;
  if (tau_lo < 0.0) throw DomainError("rescaled melon: y_grid maps before the time origin");
  const double t_max = 1.10 * tau_hi;
  const double target = 2.0 * y_grid.step / n13;
  const long count = std::max<long>(2, static_cast<long>(std::ceil(t_max / target)) + 1);
  const GridSpec tau_grid = GridSpec::from_count(0.0, t_max / static_cast<double>(count - 1), count);

  const std::vector<double> starts(static_cast<size_t>(n), 0.0);
  const LineEnsemble w = melon(sample_independent_ensemble(tau_grid, starts, 1.0, rng));

  const long kept = (keep <= 0) ? n : std::min(keep, n);
  std::vector<GridFunction> lines;
  lines.reserve(static_cast<size_t>(kept));
  const double root_n = std::sqrt(static_cast<double>(n));
  for (long i = 1; i <= kept; ++i) {
    lines.push_back(GridFunction::sample(y_grid, [&](double y) {
      const double tau = 1.0 + 2.0 * y / n13;
      return n16 * (eval(w.line(i), tau) - 2.0 * root_n - 2.0 * y * n16);
    }));
  }
  return LineEnsemble(y_grid, std::move(lines));
}

}  // namespace kpzlab
