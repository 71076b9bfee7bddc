#include "prefix_dse/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace prefix_dse {

bool dominates(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw std::invalid_argument("dominates: dimension mismatch (" + std::to_string(p.size()) +
                                " vs " + std::to_string(q.size()) + ")");
  bool strict = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > q[i]) return false;
    if (p[i] < q[i]) strict = true;
  }
  return strict;
}

std::vector<std::size_t> front_indices(const std::vector<Objectives>& points) {
  // Sorting lexicographically means a point can only be dominated by an
  // earlier one, so each candidate is checked against the current front.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  std::vector<std::size_t> front;
  for (auto i : order) {
    bool dominated = false;
    for (auto j : front)
      if (dominates(points[j], points[i])) {
        dominated = true;
        break;
      }
    if (!dominated) front.push_back(i);
  }
  std::sort(front.begin(), front.end());
  return front;
}

ParetoSet extract_front(const std::vector<ParetoPoint>& points) {
  std::vector<Objectives> values;
  values.reserve(points.size());
  for (const auto& p : points) values.push_back(p.values);
  ParetoSet out;
  for (auto i : front_indices(values)) out.points.push_back(points[i]);
  return out;
}

Objectives reference_point(const std::vector<Objectives>& points) {
  if (points.empty()) return {};
  Objectives ref = points.front();
  for (const auto& p : points) {
    if (p.size() != ref.size()) throw std::invalid_argument("reference_point: dimension mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) ref[i] = std::max(ref[i], p[i]);
  }
  return ref;
}

namespace {

double hv2(std::vector<std::pair<double, double>>& pts, double rx, double ry) {
  std::sort(pts.begin(), pts.end());
  double vol = 0.0;
  double cur_y = ry;
  for (const auto& [x, y] : pts) {
    if (y < cur_y) {
      vol += (rx - x) * (cur_y - y);
      cur_y = y;
    }
  }
  return vol;
}

// Slices along the last dimension, recursing on the remaining ones.
double hv_rec(std::vector<Objectives> pts, std::span<const double> ref) {
  const std::size_t d = ref.size();
  if (pts.empty()) return 0.0;
  if (d == 1) {
    double m = ref[0];
    for (const auto& p : pts) m = std::min(m, p[0]);
    return ref[0] - m;
  }
  if (d == 2) {
    std::vector<std::pair<double, double>> xy;
    xy.reserve(pts.size());
    for (const auto& p : pts) xy.emplace_back(p[0], p[1]);
    return hv2(xy, ref[0], ref[1]);
  }
  std::sort(pts.begin(), pts.end(),
            [d](const Objectives& a, const Objectives& b) { return a[d - 1] < b[d - 1]; });
  double vol = 0.0;
  std::vector<Objectives> slice;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    slice.emplace_back(pts[i].begin(), pts[i].end() - 1);
    const double next = i + 1 < pts.size() ? pts[i + 1][d - 1] : ref[d - 1];
    const double thick = next - pts[i][d - 1];
    if (thick <= 0.0) continue;
    slice = [&] {
      std::vector<Objectives> kept;
      for (auto j : front_indices(slice)) kept.push_back(slice[j]);
      return kept;
    }();
    vol += thick * hv_rec(slice, ref.first(d - 1));
  }
  return vol;
}

}  // namespace

double hypervolume(const std::vector<Objectives>& points, std::span<const double> reference) {
  for (const auto& p : points) {
    if (p.size() != reference.size())
      throw std::invalid_argument("hypervolume: point dimension does not match reference");
    for (std::size_t i = 0; i < p.size(); ++i)
      if (!(p[i] <= reference[i]))
        throw std::invalid_argument("hypervolume: point lies beyond the reference in objective " +
                                    std::to_string(i));
  }
  return hv_rec(points, reference);
}

double hypervolume(const ParetoSet& front) {
  std::vector<Objectives> pts;
  for (const auto& p : front.points) pts.push_back(p.values);
  return hypervolume(pts, front.reference);
}

double hv_error(const std::vector<Objectives>& true_front,
                const std::vector<Objectives>& predicted_front, std::span<const double> reference) {
  const double vt = hypervolume(true_front, reference);
  if (!(vt > 0.0)) throw UndefinedError("hv_error: true front has zero hypervolume");
  return (vt - hypervolume(predicted_front, reference)) / vt;
}

}  // namespace prefix_dse
