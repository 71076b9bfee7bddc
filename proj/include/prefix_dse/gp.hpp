#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace prefix_dse {

/// Isotropic RBF kernel hyperparameters, in standardized units.
struct GpHyperparams {
  double signal_variance = 1.0;
  double length_scale = 1.0;
  double noise_variance = 1e-2;
};

struct GpFitOptions {
  int restarts = 5;      // including the start from the initial values
  int iterations = 100;  // per restart
  std::uint64_t seed = 0;
  double noise_floor = 1e-8;
  /// Hyperparameters are fitted on a seeded subset of at most this many
  /// points (0 means all); the posterior always conditions on every point.
  std::size_t max_points_for_hyperparams = 0;
  bool optimize = true;
  /// Off: inputs are used as given (targets are still standardized).
  bool standardize_inputs = true;
};

/// Raised when the posterior variance goes below -1e-8 before clamping.
class NumericalHealthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Log marginal likelihood of standardized data and its gradient with respect
/// to (log signal_variance, log length_scale, log noise_variance).
double log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const GpHyperparams& h, Eigen::Vector3d* gradient = nullptr);

struct GpPrediction {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Exact GP posterior for one scalar objective. Inputs and targets are
/// standardized internally; predictions are returned in original units.
class GpModel {
 public:
  static GpModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const GpHyperparams& init = GpHyperparams{},
                     const GpFitOptions& options = GpFitOptions{});

  /// Latent posterior; with_noise adds the fitted observation noise.
  GpPrediction predict(const Eigen::VectorXd& x, bool with_noise = false) const;
  void predict_batch(const Eigen::MatrixXd& x, Eigen::VectorXd& mean, Eigen::VectorXd& stddev,
                     bool with_noise = false) const;

  const GpHyperparams& hyperparams() const noexcept { return hyper_; }
  bool degenerate() const noexcept { return degenerate_; }
  double jitter() const noexcept { return jitter_; }
  double log_likelihood() const noexcept { return lml_; }
  std::size_t num_train() const noexcept { return static_cast<std::size_t>(x_.rows()); }
  std::size_t dims() const noexcept { return static_cast<std::size_t>(x_mean_.size()); }
  double y_scale() const noexcept { return y_scale_; }

 private:
  GpModel() = default;
  Eigen::RowVectorXd standardize(const Eigen::VectorXd& x) const;

  Eigen::MatrixXd x_;  // standardized training inputs
  Eigen::RowVectorXd x_mean_, x_scale_;
  double y_mean_ = 0.0, y_scale_ = 1.0;
  GpHyperparams hyper_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
  bool degenerate_ = false;
};

}  // namespace prefix_dse
