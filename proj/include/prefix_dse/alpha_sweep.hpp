#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "prefix_dse/features.hpp"
#include "prefix_dse/oracle.hpp"
#include "prefix_dse/pareto.hpp"

namespace prefix_dse {

/// Joint objective: AD = a*area + delay, PD = a*power + delay,
/// PPA = a1*area + a2*power + delay, all on min-max normalized values.
enum class SweepSpace { kAD, kPD, kPPA };

std::string_view to_string(SweepSpace s);
SweepSpace parse_sweep_space(std::string_view name);
/// Objectives of the space, delay last: AD -> area,delay etc.
std::vector<Objective> objectives_of(SweepSpace s);
/// Space whose objectives match the given set (any order).
SweepSpace space_for(std::span<const Objective> objectives);

/// 1000, 0, 100, 1/100, 50, 1/50, 20, 1/20, 10, 1/10, 8, 1/8, 2, 1/2, 1
std::vector<double> default_alphas();

/// Min-max bounds per objective, indexed by Objective.
struct NormBounds {
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  static NormBounds of(const std::vector<PpaPoint>& points);
};

/// `weights` holds one value for AD/PD and (area, power) for PPA.
double scalarize(const PpaPoint& p, SweepSpace space, std::span<const double> weights,
                 const NormBounds& bounds);

/// RBF kernel ridge regression on standardized inputs, several targets at once.
class KernelRidge {
 public:
  KernelRidge(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double ridge, double length_scale);
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;

 private:
  Eigen::MatrixXd x_;
  Eigen::MatrixXd coef_;
  double length_scale_;
};

/// sqrt(median squared distance / 2) over (a subsample of) the rows of x.
double median_length_scale(const Eigen::MatrixXd& x);

struct SweepConfig {
  SweepSpace space = SweepSpace::kPD;
  std::vector<double> alphas = default_alphas();
  std::size_t top_k = 10;
  std::size_t training_size = 2500;
  std::uint64_t rng_seed = 0;
  std::vector<double> ridge_grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  int folds = 5;
  double holdout_fraction = 0.2;  // for the per-objective MSE report
  /// Replaces the kernel ridge model: returns predicted PPA for every
  /// design of the full space. Used to plug in reference predictors.
  std::function<std::vector<PpaPoint>(const std::vector<DesignInstance>&)> predictor;

  void validate() const;
};

struct WeightOutcome {
  std::vector<double> weights;
  double ridge = 0.0;  // chosen by cross validation (0 with a custom predictor)
  std::vector<std::size_t> top;  // full-space indices, best first
};

struct SweepResult {
  std::vector<WeightOutcome> per_weight;
  std::vector<std::size_t> training;    // full-space indices used for fitting
  std::vector<std::size_t> candidates;  // union of top-k, ascending
  std::vector<Objectives> candidate_values;  // true values, aligned with candidates
  std::vector<std::size_t> frontier;    // Pareto subset of candidates
  NormBounds bounds;
  double length_scale = 0.0;
  std::vector<double> holdout_mse;  // per objective of the space, normalized units
  std::size_t models_fitted = 0;
  CallCounts counts;  // init = training size, verify = new oracle calls
};

/// Scalarization baseline. `dataset` must reference instances of `full_space`.
SweepResult sweep(const std::vector<EvalRecord>& dataset,
                  const std::vector<DesignInstance>& full_space, const SweepConfig& cfg,
                  Oracle& oracle);

}  // namespace prefix_dse
