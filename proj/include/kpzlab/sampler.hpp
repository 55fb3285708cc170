#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "kpzlab/ensemble.hpp"
#include "kpzlab/rng.hpp"

namespace kpzlab {

namespace detail {

inline void check_diffusion(double diffusion) {
  if (!(diffusion > 0.0) || !std::isfinite(diffusion))
    throw ParameterError("sampler: diffusion must be positive and finite");
}

// Brownian motion drawn from an existing engine (one increment per step).
inline GridFunction brownian_from_engine(const GridSpec& g, double start, double diffusion,
                                         std::mt19937_64& eng) {
  std::normal_distribution<double> inc(0.0, std::sqrt(diffusion * g.step));
  GridFunction f = GridFunction::zero(g);
  f[0] = start;
  for (long i = 1; i < g.count; ++i) f[i] = f[i - 1] + inc(eng);
  return f;
}

// Bridge via linear correction of a motion; endpoints pinned exactly.
inline GridFunction bridge_from_engine(const GridSpec& g, double a, double b, double diffusion,
                                       std::mt19937_64& eng) {
  GridFunction f = brownian_from_engine(g, a, diffusion, eng);
  const double drift = f[g.count - 1] - b;
  const double span = g.right - g.left;
  for (long i = 1; i < g.count; ++i)
    f[i] -= drift * ((g.node(i) - g.left) / span);
  f[g.count - 1] = b;
  return f;
}

}  // namespace detail

// Brownian motion with the given diffusion coefficient: independent Gaussian
// increments of variance diffusion*step.
inline GridFunction sample_brownian(const GridSpec& g, double start, double diffusion,
                                    const RngStream& rng) {
  detail::check_diffusion(diffusion);
  auto eng = make_engine(rng);
  return detail::brownian_from_engine(g, start, diffusion, eng);
}

// Brownian bridge from a at grid.left to b at grid.right.
inline GridFunction sample_bridge(const GridSpec& g, double a, double b, double diffusion,
                                  const RngStream& rng) {
  detail::check_diffusion(diffusion);
  auto eng = make_engine(rng);
  return detail::bridge_from_engine(g, a, b, diffusion, eng);
}

// k independent motions with given start values, drawn sequentially from one
// stream. With k=1 this reproduces sample_brownian bit-for-bit.
inline LineEnsemble sample_independent_ensemble(const GridSpec& g,
                                                const std::vector<double>& starts,
                                                double diffusion, const RngStream& rng) {
  detail::check_diffusion(diffusion);
  if (starts.empty()) throw ParameterError("sampler: needs at least one start value");
  auto eng = make_engine(rng);
  std::vector<GridFunction> lines;
  lines.reserve(starts.size());
  for (double s : starts) lines.push_back(detail::brownian_from_engine(g, s, diffusion, eng));
  return LineEnsemble(g, std::move(lines));
}

struct BridgeSystemSpec {
  std::vector<double> left_values;   // strictly decreasing (line 1 on top)
  std::vector<double> right_values;  // strictly decreasing
  double diffusion = 1.0;
  std::optional<GridFunction> upper;  // strict upper barrier, or none
  std::optional<GridFunction> lower;  // strict lower barrier, or none
  long max_attempts = 100000;
};

// k bridges conditioned (by rejection) to stay strictly ordered at every node
// and strictly inside the barriers. With k=1 and no barriers the first attempt
// always accepts, reproducing sample_bridge bit-for-bit.
inline LineEnsemble sample_nonintersecting_bridges(const GridSpec& g, const BridgeSystemSpec& spec,
                                                   const RngStream& rng) {
  detail::check_diffusion(spec.diffusion);
  const size_t k = spec.left_values.size();
  if (k == 0 || spec.right_values.size() != k)
    throw ParameterError("bridges: boundary value lists empty or mismatched");
  for (size_t i = 0; i + 1 < k; ++i)
    if (!(spec.left_values[i] > spec.left_values[i + 1] &&
          spec.right_values[i] > spec.right_values[i + 1]))
      throw ParameterError("bridges: boundary values must be strictly ordered");
  if (spec.upper && !(spec.upper->grid == g))
    throw ParameterError("bridges: upper barrier grid mismatch");
  if (spec.lower && !(spec.lower->grid == g))
    throw ParameterError("bridges: lower barrier grid mismatch");
  auto barrier_ok_at_ends = [&](const std::optional<GridFunction>& bar, bool is_upper) {
    if (!bar) return true;
    const double bl = (*bar)[0], br = (*bar)[g.count - 1];
    if (is_upper) return spec.left_values.front() < bl && spec.right_values.front() < br;
    return spec.left_values.back() > bl && spec.right_values.back() > br;
  };
  if (!barrier_ok_at_ends(spec.upper, true) || !barrier_ok_at_ends(spec.lower, false))
    throw ParameterError("bridges: boundary values violate the barriers");
  if (spec.max_attempts < 1) throw ParameterError("bridges: max_attempts must be positive");

  auto eng = make_engine(rng);
  for (long attempt = 1; attempt <= spec.max_attempts; ++attempt) {
    std::vector<GridFunction> lines;
    lines.reserve(k);
    for (size_t i = 0; i < k; ++i)
      lines.push_back(detail::bridge_from_engine(g, spec.left_values[i], spec.right_values[i],
                                                 spec.diffusion, eng));
    bool ok = true;
    for (long j = 0; ok && j < g.count; ++j) {
      for (size_t i = 0; i + 1 < k; ++i)
        if (!(lines[i][j] > lines[i + 1][j])) {
          ok = false;
          break;
        }
      if (ok && spec.upper && !(lines.front()[j] < (*spec.upper)[j])) ok = false;
      if (ok && spec.lower && !(lines.back()[j] > (*spec.lower)[j])) ok = false;
    }
    if (ok) return LineEnsemble(g, std::move(lines));
  }
  throw RejectionError("bridges: rejection budget exhausted (acceptance rate below 1/" +
                           std::to_string(spec.max_attempts) + ")",
                       spec.max_attempts, 0.0);
}

}  // namespace kpzlab
