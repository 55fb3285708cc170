#pragma once

#include <utility>
#include <vector>

#include "kpzlab/grid.hpp"

namespace kpzlab {

// Ordered family of lines f_1, ..., f_k on a shared grid. Index 1 is the top
// line by convention; the container does not itself require the lines to be
// pointwise ordered (inputs to the melon are not).
class LineEnsemble {
 public:
  LineEnsemble() = default;

  LineEnsemble(GridSpec grid, std::vector<GridFunction> lines)
      : grid_(grid), lines_(std::move(lines)) {
    if (lines_.empty()) throw ValidationError("ensemble: needs at least one line");
    for (const GridFunction& f : lines_)
      if (!(f.grid == grid_)) throw ValidationError("ensemble: lines on mismatched grids");
  }

  static LineEnsemble zero(const GridSpec& g, long k) {
    std::vector<GridFunction> lines(static_cast<size_t>(k), GridFunction::zero(g));
    return LineEnsemble(g, std::move(lines));
  }

  const GridSpec& grid() const { return grid_; }
  long k() const { return static_cast<long>(lines_.size()); }

  // 1-based line access, line(1) = top.
  const GridFunction& line(long i) const {
    check_line(i);
    return lines_[static_cast<size_t>(i - 1)];
  }
  GridFunction& line(long i) {
    check_line(i);
    return lines_[static_cast<size_t>(i - 1)];
  }

  // Node value of line i (1-based) at node index j.
  double value(long i, long j) const { return line(i)[j]; }

 private:
  void check_line(long i) const {
    if (i < 1 || i > k()) throw DomainError("ensemble: line index out of range");
  }

  GridSpec grid_;
  std::vector<GridFunction> lines_;
};

// Consecutive differences g_i = f_i - f_{i+1}, i = 1..k-1.
struct GapProcess {
  GridSpec grid;
  std::vector<GridFunction> gaps;

  long k() const { return static_cast<long>(gaps.size()) + 1; }
  const GridFunction& gap(long i) const {
    if (i < 1 || i > static_cast<long>(gaps.size()))
      throw DomainError("gap process: index out of range");
    return gaps[static_cast<size_t>(i - 1)];
  }
};

inline GapProcess gap_process(const LineEnsemble& f) {
  GapProcess g;
  g.grid = f.grid();
  g.gaps.reserve(static_cast<size_t>(f.k() - 1));
  for (long i = 1; i < f.k(); ++i) {
    GridFunction d = GridFunction::zero(f.grid());
    for (long j = 0; j < f.grid().count; ++j) d[j] = f.value(i, j) - f.value(i + 1, j);
    g.gaps.push_back(std::move(d));
  }
  return g;
}

}  // namespace kpzlab
