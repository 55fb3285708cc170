#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "kpzlab/errors.hpp"

namespace kpzlab {

// Uniform grid on [left, right]. Nodes sit at left + i*step for i in [0, count).
// All continuum objects in this library are piecewise-linear interpolations of
// node values on such a grid.
struct GridSpec {
  double left = 0.0;
  double right = 1.0;
  double step = 1.0;
  long count = 2;

  GridSpec() = default;

  GridSpec(double left_, double right_, double step_) : left(left_), right(right_), step(step_) {
    if (!(std::isfinite(left) && std::isfinite(right) && std::isfinite(step)))
      throw DomainError("grid: non-finite bounds or step");
    if (!(left < right)) throw DomainError("grid: requires left < right");
    if (!(step > 0.0)) throw DomainError("grid: requires step > 0");
    const double span = right - left;
    count = std::lround(span / step) + 1;
    if (count < 2) throw DomainError("grid: fewer than two nodes");
    if (std::fabs((static_cast<double>(count - 1)) * step - span) > 1e-9 * std::fmax(1.0, span))
      throw DomainError("grid: step does not divide the interval");
  }

  // Grid with explicit node count; right end is derived.
  static GridSpec from_count(double left_, double step_, long count_) {
    if (count_ < 2) throw DomainError("grid: fewer than two nodes");
    if (!(step_ > 0.0)) throw DomainError("grid: requires step > 0");
    GridSpec g;
    g.left = left_;
    g.step = step_;
    g.count = count_;
    g.right = left_ + static_cast<double>(count_ - 1) * step_;
    return g;
  }

  double node(long i) const { return left + static_cast<double>(i) * step; }

  bool contains(double x) const { return x >= left - 1e-9 * step && x <= right + 1e-9 * step; }

  // Nearest node index, clamped into the grid.
  long nearest(double x) const {
    long i = std::lround((x - left) / step);
    if (i < 0) i = 0;
    if (i >= count) i = count - 1;
    return i;
  }

  // Index of the node at x; x must lie on a node up to tol_frac*step.
  long index_at(double x, double tol_frac = 1e-6) const {
    long i = nearest(x);
    if (std::fabs(node(i) - x) > tol_frac * step)
      throw DomainError("grid: " + std::to_string(x) + " is not a grid node");
    return i;
  }

  bool operator==(const GridSpec&) const = default;
};

// Node values of a scalar function on a grid, interpreted piecewise-linearly.
struct GridFunction {
  GridSpec grid;
  std::vector<double> values;

  GridFunction() = default;

  GridFunction(GridSpec g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<long>(values.size()) != grid.count)
      throw ValidationError("grid function: value count does not match grid");
    for (double x : values)
      if (!std::isfinite(x)) throw ValidationError("grid function: non-finite value");
  }

  static GridFunction zero(const GridSpec& g) {
    GridFunction f;
    f.grid = g;
    f.values.assign(static_cast<size_t>(g.count), 0.0);
    return f;
  }

  template <class Fn>
  static GridFunction sample(const GridSpec& g, Fn&& fn) {
    GridFunction f = zero(g);
    for (long i = 0; i < g.count; ++i) f.values[static_cast<size_t>(i)] = fn(g.node(i));
    return f;
  }

  double operator[](long i) const { return values[static_cast<size_t>(i)]; }
  double& operator[](long i) { return values[static_cast<size_t>(i)]; }
};

// Piecewise-linear evaluation, exact at nodes.
inline double eval(const GridFunction& f, double x) {
  const GridSpec& g = f.grid;
  if (!g.contains(x)) throw DomainError("eval: point outside grid domain");
  long i = static_cast<long>(std::floor((x - g.left) / g.step));
  if (i < 0) i = 0;
  if (i > g.count - 2) i = g.count - 2;
  const double theta = (x - g.node(i)) / g.step;
  if (theta <= 0.0) return f[i];
  if (theta >= 1.0) return f[i + 1];
  return f[i] + theta * (f[i + 1] - f[i]);
}

}  // namespace kpzlab
