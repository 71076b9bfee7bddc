#pragma once

// Independent checks for front extraction and hypervolume.

#include <algorithm>
#include <cmath>
#include <vector>

#include "prefix_dse/pareto.hpp"

namespace oracle {

using prefix_dse::Objectives;

// O(n^2) dominance filter.
inline std::vector<std::size_t> brute_front(const std::vector<Objectives>& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size() && !dominated; ++j) dominated = j != i && prefix_dse::dominates(pts[j], pts[i]);
    if (!dominated) out.push_back(i);
  }
  return out;
}

// Uniform midpoint grid over [min, ref]. The last axis is counted in closed
// form per column: a midpoint is covered when it lies at or above the lowest
// last coordinate among points covering the column.
inline double grid_volume(const std::vector<Objectives>& pts, const Objectives& ref, int cells) {
  const std::size_t d = ref.size();
  Objectives lo(d, 1e300);
  for (const auto& p : pts)
    for (std::size_t k = 0; k < d; ++k) lo[k] = std::min(lo[k], p[k]);
  std::vector<double> step(d);
  double cell = 1.0;
  for (std::size_t k = 0; k < d; ++k) {
    step[k] = (ref[k] - lo[k]) / cells;
    cell *= step[k];
  }
  if (cell <= 0.0) return 0.0;
  long columns = 1;
  for (std::size_t k = 0; k + 1 < d; ++k) columns *= cells;
  long hit = 0;
  Objectives x(d);
  for (long c = 0; c < columns; ++c) {
    long r = c;
    for (std::size_t k = 0; k + 1 < d; ++k) {
      x[k] = lo[k] + (static_cast<double>(r % cells) + 0.5) * step[k];
      r /= cells;
    }
    double thr = 1e300;
    for (const auto& p : pts) {
      bool in = true;
      for (std::size_t k = 0; k + 1 < d && in; ++k) in = p[k] <= x[k];
      if (in) thr = std::min(thr, p[d - 1]);
    }
    if (thr > ref[d - 1]) continue;
    // Smallest i with lo + (i + 0.5) * step >= thr.
    const double first = std::ceil((thr - lo[d - 1]) / step[d - 1] - 0.5);
    hit += cells - static_cast<long>(std::clamp(first, 0.0, static_cast<double>(cells)));
  }
  return static_cast<double>(hit) * cell;
}

}  // namespace oracle
