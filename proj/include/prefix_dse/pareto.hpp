#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace prefix_dse {

/// Objective vector; every objective is minimized.
using Objectives = std::vector<double>;

/// Raised by hv_error when the true front encloses no volume.
class UndefinedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// p <= q componentwise with at least one strict component.
bool dominates(std::span<const double> p, std::span<const double> q);

struct ParetoPoint {
  std::size_t id = 0;
  Objectives values;
};

struct ParetoSet {
  std::vector<ParetoPoint> points;
  Objectives reference;  // may be empty until assigned
};

/// Indices of non-dominated points, in input order. Duplicates are all kept.
std::vector<std::size_t> front_indices(const std::vector<Objectives>& points);

ParetoSet extract_front(const std::vector<ParetoPoint>& points);

/// Per-dimension maxima.
Objectives reference_point(const std::vector<Objectives>& points);

/// Volume dominated by `points` and bounded by `reference`. Dominated and
/// duplicate points contribute nothing.
double hypervolume(const std::vector<Objectives>& points, std::span<const double> reference);
double hypervolume(const ParetoSet& front);

/// (V(true) - V(predicted)) / V(true).
double hv_error(const std::vector<Objectives>& true_front,
                const std::vector<Objectives>& predicted_front, std::span<const double> reference);

}  // namespace prefix_dse
