#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kpzlab/grid.hpp"

namespace kpzlab {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov distribution survival function Q(lambda) = P(K > lambda),
// evaluated by the alternating series 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2).
inline double ks_asymptotic_sf(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * static_cast<double>(j) * static_cast<double>(j) *
                                 lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsReport {
  long n = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  bool pass(double alpha) const { return p_value > alpha; }
};

namespace detail {
constexpr long kSampleFloor = 50;

inline double ks_p_from_stat(double d, double n_eff) {
  const double rn = std::sqrt(n_eff);
  return ks_asymptotic_sf((rn + 0.12 + 0.11 / rn) * d);
}
}  // namespace detail

// One-sample KS test of the samples against the standard normal law.
inline KsReport ks_test_standard_normal(std::vector<double> samples) {
  const long n = static_cast<long>(samples.size());
  if (n < detail::kSampleFloor)
    throw ParameterError("ks test: needs at least 50 samples");
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  for (long i = 0; i < n; ++i) {
    const double u = normal_cdf(samples[static_cast<size_t>(i)]);
    d = std::max(d, u - static_cast<double>(i) / static_cast<double>(n));
    d = std::max(d, static_cast<double>(i + 1) / static_cast<double>(n) - u);
  }
  return {n, d, detail::ks_p_from_stat(d, static_cast<double>(n))};
}

// Standardized local increments (h(y+eps) - h(y)) / sqrt(2 eps) against the
// standard normal.
inline KsReport increment_gaussianity(const std::vector<double>& standardized_increments) {
  return ks_test_standard_normal(standardized_increments);
}

// Two-sample KS test.
inline KsReport two_sample_test(std::vector<double> a, std::vector<double> b) {
  const long na = static_cast<long>(a.size()), nb = static_cast<long>(b.size());
  if (na < detail::kSampleFloor || nb < detail::kSampleFloor)
    throw ParameterError("ks test: needs at least 50 samples per side");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  long ia = 0, ib = 0;
  while (ia < na && ib < nb) {
    if (a[static_cast<size_t>(ia)] <= b[static_cast<size_t>(ib)])
      ++ia;
    else
      ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / static_cast<double>(na) -
                              static_cast<double>(ib) / static_cast<double>(nb)));
  }
  const double n_eff = static_cast<double>(na) * static_cast<double>(nb) /
                       static_cast<double>(na + nb);
  return {na + nb, d, detail::ks_p_from_stat(d, n_eff)};
}

// Sum of squared increments over a mesh partition of [a, b]. The mesh is
// snapped to a whole number of grid steps so every partition point is a node;
// a trailing partial cell is included.
inline double quadratic_variation(const GridFunction& f, double a, double b, double mesh) {
  const GridSpec& g = f.grid;
  if (mesh < g.step * (1.0 - 1e-9)) throw ParameterError("qv: mesh finer than the grid");
  if (a >= b) throw DomainError("qv: empty interval");
  if (!g.contains(a) || !g.contains(b)) throw DomainError("qv: interval outside the grid");
  const long ia = g.nearest(a), ib = g.nearest(b);
  const long stride = std::max<long>(1, std::lround(mesh / g.step));
  double qv = 0.0;
  for (long i = ia; i < ib;) {
    const long j = std::min(i + stride, ib);
    const double d = f[j] - f[i];
    qv += d * d;
    i = j;
  }
  return qv;
}

// Largest increment ratio |f(s)-f(t)| / |s-t|^beta over dyadic gap sizes.
inline double holder_modulus(const GridFunction& f, double a, double b, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("holder: beta must be in (0,1)");
  const GridSpec& g = f.grid;
  if (!g.contains(a) || !g.contains(b)) throw DomainError("holder: interval outside the grid");
  const long ia = g.nearest(a), ib = g.nearest(b);
  if (ia >= ib) throw DomainError("holder: empty interval");
  double worst = 0.0;
  for (long gap = 1; gap <= ib - ia; gap *= 2) {
    const double denom = std::pow(static_cast<double>(gap) * g.step, beta);
    for (long i = ia; i + gap <= ib; ++i)
      worst = std::max(worst, std::fabs(f[i + gap] - f[i]) / denom);
  }
  return worst;
}

struct ArgmaxGap {
  long node = 0;          // maximizing node
  double location = 0.0;  // its coordinate
  double value = 0.0;
  double gap = 0.0;       // value minus best node outside the exclusion zone
  bool degenerate = false;  // no competitor outside the zone, or an exact tie
};

// Argmax over [a, b] and the margin to the best value attained at least
// exclusion_steps grid steps away from it.
inline ArgmaxGap argmax_gap(const GridFunction& f, double a, double b,
                            long exclusion_steps = 10) {
  const GridSpec& g = f.grid;
  if (!g.contains(a) || !g.contains(b)) throw DomainError("argmax: interval outside the grid");
  const long ia = g.nearest(a), ib = g.nearest(b);
  if (ia > ib) throw DomainError("argmax: empty interval");
  ArgmaxGap r;
  r.node = ia;
  for (long i = ia; i <= ib; ++i)
    if (f[i] > f[r.node]) r.node = i;
  r.location = g.node(r.node);
  r.value = f[r.node];
  bool found = false;
  double second = 0.0;
  for (long i = ia; i <= ib; ++i) {
    if (std::labs(i - r.node) <= exclusion_steps) continue;
    if (!found || f[i] > second) {
      second = f[i];
      found = true;
    }
  }
  if (!found) {
    r.degenerate = true;
    return r;
  }
  r.gap = r.value - second;
  r.degenerate = (r.gap == 0.0);
  return r;
}

}  // namespace kpzlab
