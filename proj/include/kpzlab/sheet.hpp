#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "kpzlab/lpp.hpp"
#include "kpzlab/pitman.hpp"

namespace kpzlab {

// Finite-n approximation of the two-parameter sheet S(x, y). A replica holds
// n independent standard motions together with their melon on one time grid.
// Passage values S(x, y) and profile sweeps run over the independent lines;
// the melon supplies the rescaled top lines, anchored geodesics, and the
// level decomposition at the spatial origin. The two agree exactly on
// passage values rooted at the time origin, so the x = 0 column is shared.
//
// Coordinate system. Both ensembles live on a uniform time grid with step 1/M,
// where M is chosen so the induced spatial step delta = n^{1/3} / (2M) is at
// most the requested resolution. Spatial positions are integer multiples of
// delta and map to integer time nodes:
//   y at spatial index iy  <->  time node M + iy   (time 1 + 2 y n^{-1/3})
//   x at spatial index ix  <->  time node ix       (time 2 x n^{-1/3}), x >= 0
// so queries snap to nodes and the passage DP runs between exact nodes. The
// grid starts at time 0, which bounds queries to the cone
// x <= n^{1/3}/2 + y (time of x at most time of y).
//
// Values: with V the passage value over the independent lines from
// (node of x, line n) to (node of y, line 1),
//   S_n(x, y) = n^{1/6} (V - 2 sqrt(n)) - 2 (y - x) n^{1/3},
// and S_n(0, .) is served bitwise from the stored rescaled top line.
struct SheetApprox {
  LineEnsemble base;    // independent source lines on the time grid
  LineEnsemble raw;     // their melon, line 1 = top
  LineEnsemble scaled;  // top kept lines in sheet coordinates on the y grid
  long n = 1;           // melon size, sets the scaling constants
  long depth = 1;       // maximal anchor depth
  long m = 0;           // time node of the spatial origin (time 1)
  double delta = 1.0;   // spatial step
  long ix_hi = 0;       // declared x query range [0, ix_hi] in spatial indices
  long iy_lo = 0, iy_hi = 0;  // declared y query range in spatial indices
  double n13 = 1.0, n16 = 1.0, root_n = 1.0;

  const GridSpec& y_grid() const { return scaled.grid(); }
  const GridFunction& top_line() const { return scaled.line(1); }
  double y_at(long iy) const { return delta * static_cast<double>(iy); }

  long y_index(double y) const {
    const long iy = std::lround(y / delta);
    if (iy < iy_lo || iy > iy_hi) throw DomainError("sheet: y outside the declared range");
    return iy;
  }
  long x_index(double x) const {
    if (x < 0.0) throw DomainError("sheet: x must be nonnegative");
    const long ix = std::lround(x / delta);
    if (ix > ix_hi) throw DomainError("sheet: x outside the declared range");
    return ix;
  }

  // Time node of the anchor (-sqrt(k/(2x)), k).
  long anchor_node(double x, long k) const {
    if (!(x > 0.0)) throw DomainError("sheet: anchors need x > 0");
    if (k < 1 || k > depth) throw ParameterError("sheet: anchor depth outside [1, depth]");
    const long ia = std::lround(-std::sqrt(static_cast<double>(k) / (2.0 * x)) / delta);
    if (m + ia < 0)
      throw DomainError("sheet: anchor falls before the time origin; increase n or x");
    return m + ia;
  }
};

namespace detail {

inline SheetApprox assemble_sheet(LineEnsemble base, LineEnsemble raw, long n, long depth_k,
                                  long m, double delta, long ix_hi, long iy_lo, long iy_hi,
                                  long keep) {
  SheetApprox s;
  s.base = std::move(base);
  s.raw = std::move(raw);
  s.n = n;
  s.depth = depth_k;
  s.m = m;
  s.delta = delta;
  s.ix_hi = ix_hi;
  s.iy_lo = iy_lo;
  s.iy_hi = iy_hi;
  s.n13 = std::cbrt(static_cast<double>(n));
  s.n16 = std::sqrt(s.n13);
  s.root_n = std::sqrt(static_cast<double>(n));

  const GridSpec y_grid =
      GridSpec::from_count(delta * static_cast<double>(iy_lo), delta, iy_hi - iy_lo + 1);
  std::vector<GridFunction> lines;
  const long kept = std::min(keep, s.raw.k());
  lines.reserve(static_cast<size_t>(kept));
  for (long i = 1; i <= kept; ++i) {
    GridFunction a = GridFunction::zero(y_grid);
    for (long iy = iy_lo; iy <= iy_hi; ++iy) {
      const double y = delta * static_cast<double>(iy);
      a[iy - iy_lo] = s.n16 * (s.raw.value(i, m + iy) - 2.0 * s.root_n - 2.0 * y * s.n16);
    }
    lines.push_back(std::move(a));
  }
  s.scaled = LineEnsemble(y_grid, std::move(lines));
  return s;
}

}  // namespace detail

// Simulates a fresh melon and wraps it as a sheet approximation covering
// x in [0, x_hi] and y in [y_lo, y_hi] at spatial resolution <= step.
// keep = 0 retains depth_k + 2 rescaled lines.
inline SheetApprox build_sheet_approx(long n, long depth_k, double x_hi, double y_lo,
                                      double y_hi, double step, RngStream rng, long keep = 0,
                                      double memory_budget = 2e9) {
  if (depth_k < 1 || n < depth_k) throw ParameterError("sheet: requires n >= depth_k >= 1");
  if (!(step > 0.0)) throw ParameterError("sheet: step must be positive");
  if (y_lo > y_hi || y_hi < 0.0 || x_hi < 0.0)
    throw ParameterError("sheet: ranges must satisfy y_lo <= y_hi, y_hi >= 0, x_hi >= 0");
  const double n13 = std::cbrt(static_cast<double>(n));
  const long m = std::max<long>(1, static_cast<long>(std::ceil(n13 / (2.0 * step))));
  const double delta = n13 / (2.0 * static_cast<double>(m));
  const long iy_lo = static_cast<long>(std::floor(y_lo / delta));
  const long iy_hi = static_cast<long>(std::ceil(y_hi / delta));
  if (m + iy_lo < 0)
    throw DomainError("sheet: y range maps before the time origin; increase n");
  const long ix_hi = static_cast<long>(std::ceil(x_hi / delta));
  if (ix_hi > m + iy_hi)
    throw DomainError("sheet: x range exceeds the reachable cone; increase n or y range");
  const long count = std::max(m + iy_hi, ix_hi) + 1;
  const double bytes = 2.0 * static_cast<double>(n) * static_cast<double>(count) * 8.0;
  if (bytes > memory_budget)
    throw ResourceError("sheet: grid would exceed the memory budget; reduce n or the ranges");

  const GridSpec tau_grid = GridSpec::from_count(0.0, 1.0 / static_cast<double>(m), count);
  const std::vector<double> starts(static_cast<size_t>(n), 0.0);
  LineEnsemble b = sample_independent_ensemble(tau_grid, starts, 1.0, rng);
  LineEnsemble w = melon(b);
  const long kept = (keep <= 0) ? std::min(n, depth_k + 2) : std::min(keep, n);
  return detail::assemble_sheet(std::move(b), std::move(w), n, depth_k, m, delta, ix_hi, iy_lo,
                                iy_hi, kept);
}

// Wraps a caller-supplied ensemble (typically a deterministic stub) as a
// sheet. The ensemble serves as both the source lines and the melon, on a
// time grid whose node m_index is the spatial origin; the scaling constants
// come from n_scale.
inline SheetApprox sheet_from_ensemble(LineEnsemble raw, long n_scale, long depth_k,
                                       long m_index) {
  if (depth_k < 1 || depth_k > raw.k()) throw ParameterError("sheet: depth outside [1, k]");
  if (n_scale < 1) throw ParameterError("sheet: n_scale must be >= 1");
  const long count = raw.grid().count;
  if (m_index < 0 || m_index >= count) throw ParameterError("sheet: origin node outside grid");
  const double delta = std::cbrt(static_cast<double>(n_scale)) / (2.0 * static_cast<double>(m_index));
  const long k = raw.k();
  LineEnsemble base = raw;
  return detail::assemble_sheet(std::move(base), std::move(raw), n_scale, depth_k, m_index,
                                delta, count - 1, -m_index, count - 1 - m_index, k);
}

// S_n(x, y). The x = 0 column is returned from the stored top line so the
// identity S_n(0, .) = A_1(.) holds bitwise.
inline double sheet_value(const SheetApprox& s, double x, double y) {
  const long ix = s.x_index(x);
  const long iy = s.y_index(y);
  if (ix == 0) return s.top_line()[iy - s.iy_lo];
  if (ix > s.m + iy)
    throw DomainError("sheet: query outside the reachable cone (x > n^{1/3}/2 + y)");
  const auto T = detail::dp_sweep(s.base, 1, static_cast<int>(s.base.k()), ix, s.m + iy,
                                  {{static_cast<int>(s.base.k()), ix, 0.0}});
  const double v = T.at(1, s.m + iy);
  return s.n16 * (v - 2.0 * s.root_n) - 2.0 * (s.y_at(iy) - s.y_at(ix)) * s.n13;
}

// S_n(x, .) on [y_lo, y_hi] from one DP sweep.
inline GridFunction sheet_profile(const SheetApprox& s, double x, double y_lo, double y_hi) {
  const long ix = s.x_index(x);
  const long ia = s.y_index(y_lo), ib = s.y_index(y_hi);
  if (ia > ib) throw DomainError("sheet: empty profile range");
  const GridSpec sub = GridSpec::from_count(s.y_at(ia), s.delta, ib - ia + 1);
  GridFunction out = GridFunction::zero(sub);
  if (ix == 0) {
    for (long iy = ia; iy <= ib; ++iy) out[iy - ia] = s.top_line()[iy - s.iy_lo];
    return out;
  }
  if (ix > s.m + ia)
    throw DomainError("sheet: profile start outside the reachable cone");
  const auto T = detail::dp_sweep(s.base, 1, static_cast<int>(s.base.k()), ix, s.m + ib,
                                  {{static_cast<int>(s.base.k()), ix, 0.0}});
  for (long iy = ia; iy <= ib; ++iy)
    out[iy - ia] =
        s.n16 * (T.at(1, s.m + iy) - 2.0 * s.root_n) - 2.0 * (s.y_at(iy) - s.y_at(ix)) * s.n13;
  return out;
}

// Rightmost geodesic from the depth-k anchor of x to (y, 1), as a path on the
// underlying time grid. Rescaling shifts every line by the same function of
// the time coordinate, so the optimal jump structure is the same in sheet
// coordinates.
inline LatticePath anchored_geodesic(const SheetApprox& s, double x, long k, double y) {
  const long ia = s.anchor_node(x, k);
  const long iy = s.y_index(y);
  const long target = s.m + iy;
  if (ia > target) throw DomainError("sheet: anchor lies after the query time");
  const auto T = detail::dp_sweep(s.raw, 1, static_cast<int>(k), ia, target,
                                  {{static_cast<int>(k), ia, 0.0}});
  return detail::backtrack(s.raw, T, ia, target, detail::TiePolicy::PreferJump);
}

// Jump node where the path leaves line l (its last time on that line); for
// the end line this is the path's endpoint.
inline long z_level_node(const LatticePath& p, long l) {
  if (l < p.end_line || l > p.start_line) throw DomainError("z level: line outside the path");
  if (l == p.end_line) return p.end_node;
  return p.jump_nodes[static_cast<size_t>(p.start_line - l)];
}

// Same as a time coordinate on the path's grid.
inline double z_level(const LatticePath& p, long l) { return p.grid.node(z_level_node(p, l)); }

struct StabilizationResult {
  bool stabilized = false;
  std::optional<long> k_prime;   // first anchor depth of the constant run
  std::optional<double> value;   // the stabilized difference, sheet scale
  std::vector<double> d_values;  // D_k for k in [k_lo, k_hi], sheet scale
};

// Scans anchor depths k in [k_lo, k_hi] and computes
//   D_k = A[x_k -> (0, l)] - A[x_k -> (0, 1)]
// in sheet scale (the rescaling's affine shift cancels in the difference, so
// D_k = n^{1/6} times the raw value difference). Stabilized means D_k is
// constant to 1e-9 across the trailing half of the scanned range.
inline StabilizationResult stabilization_check(const SheetApprox& s, double x, long l,
                                               long k_lo, long k_hi) {
  if (l < 1 || k_lo < l || k_hi < k_lo || k_hi > s.depth)
    throw ParameterError("stabilization: need 1 <= l <= k_lo <= k_hi <= depth");
  StabilizationResult r;
  for (long k = k_lo; k <= k_hi; ++k) {
    const long ia = s.anchor_node(x, k);
    const auto T = detail::dp_sweep(s.raw, 1, static_cast<int>(k), ia, s.m,
                                    {{static_cast<int>(k), ia, 0.0}});
    r.d_values.push_back(s.n16 * (T.at(static_cast<int>(l), s.m) - T.at(1, s.m)));
  }
  const long len = static_cast<long>(r.d_values.size());
  const double last = r.d_values.back();
  long run_start = len - 1;
  while (run_start > 0 && std::fabs(r.d_values[static_cast<size_t>(run_start - 1)] - last) <= 1e-9)
    --run_start;
  if (run_start <= len / 2) {
    r.stabilized = true;
    r.k_prime = k_lo + run_start;
    r.value = last;
  }
  return r;
}

// A[x -> (0, l)]: the stabilized anchor difference plus S(x, 0). The l = 1
// case is S(x, 0) itself.
inline double line_to_point_value(const SheetApprox& s, double x, long l) {
  if (l == 1) return sheet_value(s, x, 0.0);
  if (l < 1 || l > s.depth) throw ParameterError("line-to-point: l outside [1, depth]");
  const StabilizationResult st = stabilization_check(s, x, l, l, s.depth);
  if (!st.stabilized)
    throw UnavailableError("line-to-point: anchor differences did not stabilize");
  return *st.value + sheet_value(s, x, 0.0);
}

// A[(0, l) -> (., 1)] on [y_lo, y_hi]: passage profile from the origin point
// of line l, in sheet scale.
inline GridFunction origin_line_profile(const SheetApprox& s, long l, double y_lo, double y_hi) {
  if (l < 1 || l > s.raw.k()) throw ParameterError("origin profile: line outside ensemble");
  const long ia = s.y_index(y_lo), ib = s.y_index(y_hi);
  if (ia > ib) throw DomainError("origin profile: empty range");
  if (ia < 0) throw DomainError("origin profile: range must start at y >= 0");
  const auto T = detail::dp_sweep(s.raw, 1, static_cast<int>(l), s.m, s.m + ib,
                                  {{static_cast<int>(l), s.m, 0.0}});
  const GridSpec sub = GridSpec::from_count(s.y_at(ia), s.delta, ib - ia + 1);
  GridFunction out = GridFunction::zero(sub);
  for (long iy = ia; iy <= ib; ++iy)
    out[iy - ia] = s.n16 * T.at(1, s.m + iy) - 2.0 * s.y_at(iy) * s.n13;
  return out;
}

struct CoalescenceResult {
  bool coalesced = false;
  std::optional<double> t;  // last shared time, in y coordinates
  std::optional<long> d;    // line index shared at that time
  std::vector<std::pair<long, long>> per_k;  // (shared node, shared line) per depth
};

// Looks for the largest time at which the anchored geodesics to y and to z
// share a point, per anchor depth, and requires the answer to be consistent
// across the trailing half of the depth range.
inline CoalescenceResult coalescence_check(const SheetApprox& s, double x, double y, double z,
                                           long k_lo, long k_hi) {
  if (k_lo < 1 || k_hi < k_lo || k_hi > s.depth)
    throw ParameterError("coalescence: bad depth range");
  const long iy = s.y_index(y), iz = s.y_index(z);
  if (iy > iz) throw DomainError("coalescence: needs y <= z");
  CoalescenceResult r;
  if (iy == iz) {
    r.coalesced = true;
    r.t = s.y_at(iy);
    r.d = 1;
    return r;
  }
  for (long k = k_lo; k <= k_hi; ++k) {
    const LatticePath py = anchored_geodesic(s, x, k, y);
    const LatticePath pz = anchored_geodesic(s, x, k, z);
    long node = -1, line = -1;
    for (long t = s.m + iy; t >= py.start_node; --t) {
      long shared = -1;
      for (long ly : {static_cast<long>(py.line_before(t)), static_cast<long>(py.line_at(t))})
        for (long lz : {static_cast<long>(pz.line_before(t)), static_cast<long>(pz.line_at(t))})
          if (ly == lz) shared = std::max(shared, ly);
      if (shared > 0) {
        node = t;
        line = shared;
        break;
      }
    }
    r.per_k.emplace_back(node, line);
  }
  const long len = static_cast<long>(r.per_k.size());
  const auto& last = r.per_k.back();
  if (last.first < 0) return r;
  bool consistent = true;
  for (long i = len / 2; i < len; ++i)
    if (r.per_k[static_cast<size_t>(i)].first != last.first) consistent = false;
  if (consistent) {
    r.coalesced = true;
    r.t = s.y_at(last.first - s.m);
    r.d = last.second;
  }
  return r;
}

struct DecompositionReport {
  double max_abs_deviation = 0.0;
  long points_checked = 0;
  long points_skipped = 0;  // x columns whose stabilization was unavailable
  long l_max = 0;           // crossing-line bound actually used
};

// Checks the level decomposition of the anchored passage values,
//   A[x_K -> (y, 1)] - A[x_K -> (0, 1)]
//     = max over l <= L0 of (D_l + A[(0, l) -> (y, 1)]),
// on a grid of (x, y) pairs, with K the sheet's depth, x_K the depth-K
// anchor of x, D_l the stabilized anchor difference for line l, and L0 read
// off the deepest anchored geodesic to (y0p, 1) as its line just before
// time 0. The left side is the sheet increment as represented through the
// deep anchor; the right side splits it at time 0. Geodesic ordering keeps
// every crossing line index at most L0 for x <= x0p and y <= y0p, so the
// two sides agree up to roundoff; deviations report ordering or
// stabilization failures. Columns whose differences fail to stabilize are
// skipped.
inline DecompositionReport decomposition_check(const SheetApprox& s, double x_lo, double x_hi,
                                               double y_lo, double y_hi, double x0p, double y0p,
                                               long points_per_axis = 5) {
  if (x_lo < 1.0 || x_lo > x_hi || y_lo < 1.0 || y_lo > y_hi)
    throw ParameterError("decomposition: needs 1 <= x_lo <= x_hi and 1 <= y_lo <= y_hi");
  if (x_hi > x0p || y_hi > y0p)
    throw ParameterError("decomposition: ranges must stay at or below the anchor pair");
  if (points_per_axis < 1) throw ParameterError("decomposition: needs >= 1 point per axis");
  const LatticePath guide = anchored_geodesic(s, x0p, s.depth, y0p);
  const long l0 = guide.line_before(s.m);

  DecompositionReport rep;
  rep.l_max = l0;
  std::vector<GridFunction> profiles;
  profiles.reserve(static_cast<size_t>(l0));
  for (long l = 1; l <= l0; ++l) profiles.push_back(origin_line_profile(s, l, y_lo, y_hi));

  const long ix_a = s.x_index(x_lo), ix_b = s.x_index(x_hi);
  const long iy_a = s.y_index(y_lo), iy_b = s.y_index(y_hi);
  const long x_stride = std::max<long>(1, (ix_b - ix_a) / std::max<long>(1, points_per_axis - 1));
  const long y_stride = std::max<long>(1, (iy_b - iy_a) / std::max<long>(1, points_per_axis - 1));
  for (long ix = ix_a; ix <= ix_b; ix += x_stride) {
    const double x = s.y_at(ix);
    const long ia = s.anchor_node(x, s.depth);
    const auto T = detail::dp_sweep(s.raw, 1, static_cast<int>(s.depth), ia, s.m + iy_b,
                                    {{static_cast<int>(s.depth), ia, 0.0}});
    std::vector<double> dvals{0.0};
    bool available = true;
    for (long l = 2; l <= l0 && available; ++l) {
      const StabilizationResult st = stabilization_check(s, x, l, l, s.depth);
      if (!st.stabilized) {
        available = false;
        break;
      }
      dvals.push_back(*st.value);
    }
    if (!available) {
      ++rep.points_skipped;
      continue;
    }
    for (long iy = iy_a; iy <= iy_b; iy += y_stride) {
      const double lhs =
          s.n16 * (T.at(1, s.m + iy) - T.at(1, s.m)) - 2.0 * s.y_at(iy) * s.n13;
      double rhs = -std::numeric_limits<double>::infinity();
      for (long l = 1; l <= l0; ++l)
        rhs = std::max(rhs, dvals[static_cast<size_t>(l - 1)] +
                                profiles[static_cast<size_t>(l - 1)][iy - iy_a]);
      rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::fabs(lhs - rhs));
      ++rep.points_checked;
    }
  }
  return rep;
}

}  // namespace kpzlab
