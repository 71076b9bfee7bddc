#include "prefix_dse/gp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>

namespace prefix_dse {

namespace {

constexpr std::array<double, 6> kJitterLadder{0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd d = (-2.0 * a * b.transpose()).eval();
  d.colwise() += na;
  d.rowwise() += nb.transpose();
  return d.cwiseMax(0.0);
}

Eigen::MatrixXd rbf(const Eigen::MatrixXd& sqdist, const GpHyperparams& h) {
  // Exponents below -200 (relative value 1e-87) are zeroed so products in the
  // dense kernels never go subnormal.
  const Eigen::ArrayXXd e = (sqdist * (-0.5 / (h.length_scale * h.length_scale))).array();
  return h.signal_variance * (e < -200.0).select(0.0, e.exp());
}

struct Factor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

// Cholesky of K + noise*I, walking up the jitter ladder on failure.
std::optional<Factor> factorize(const Eigen::MatrixXd& k, double noise) {
  for (double j : kJitterLadder) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += noise + j;
    Factor f{Eigen::LLT<Eigen::MatrixXd>(a), j};
    if (f.llt.info() == Eigen::Success) return f;
  }
  return std::nullopt;
}

double lml_impl(const Eigen::MatrixXd& sqdist, const Eigen::VectorXd& y, const GpHyperparams& h,
                Eigen::Vector3d* grad) {
  const auto n = static_cast<double>(y.size());
  const Eigen::MatrixXd kf = rbf(sqdist, h);
  const auto f = factorize(kf, h.noise_variance);
  if (!f) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd alpha = f->llt.solve(y);
  const Eigen::MatrixXd& l = f->llt.matrixLLT();
  const double logdet = 2.0 * l.diagonal().array().log().sum();
  const double lml = -0.5 * y.dot(alpha) - 0.5 * logdet - 0.5 * n * std::log(2.0 * std::numbers::pi);
  if (grad) {
    Eigen::MatrixXd m = f->llt.solve(Eigen::MatrixXd::Identity(y.size(), y.size()));
    m = alpha * alpha.transpose() - m;
    const double inv_l2 = 1.0 / (h.length_scale * h.length_scale);
    (*grad)(0) = 0.5 * (m.array() * kf.array()).sum();
    (*grad)(1) = 0.5 * (m.array() * kf.array() * sqdist.array()).sum() * inv_l2;
    (*grad)(2) = 0.5 * h.noise_variance * m.trace();
  }
  return lml;
}

GpHyperparams from_log(const Eigen::Vector3d& t) {
  return {std::exp(t(0)), std::exp(t(1)), std::exp(t(2))};
}

Eigen::Vector3d to_log(const GpHyperparams& h) {
  return {std::log(h.signal_variance), std::log(h.length_scale), std::log(h.noise_variance)};
}

// Sign-based adaptive steps (iRprop-) in log space; robust to the very
// different curvature of the three parameters.
Eigen::Vector3d ascend(const Eigen::MatrixXd& sqdist, const Eigen::VectorXd& y, Eigen::Vector3d t,
                       const Eigen::Vector3d& lo, const Eigen::Vector3d& hi, int iterations,
                       double& best_lml) {
  Eigen::Vector3d step = Eigen::Vector3d::Constant(0.1);
  Eigen::Vector3d prev_grad = Eigen::Vector3d::Zero();
  Eigen::Vector3d best = t;
  best_lml = -std::numeric_limits<double>::infinity();
  Eigen::Vector3d last_ok = t;
  int stalled = 0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::Vector3d g;
    const double v = lml_impl(sqdist, y, from_log(t), &g);
    if (!std::isfinite(v)) {
      t = last_ok;
      step *= 0.5;
      prev_grad.setZero();
      continue;
    }
    last_ok = t;
    if (v > best_lml + 1e-7 * (1.0 + std::abs(best_lml)) || !std::isfinite(best_lml)) stalled = 0;
    else if (++stalled >= 10) break;  // converged or oscillating at the optimum
    if (v > best_lml) {
      best_lml = v;
      best = t;
    }
    if (g.norm() < 1e-9) break;
    for (int i = 0; i < 3; ++i) {
      if (g(i) * prev_grad(i) > 0) {
        step(i) = std::min(step(i) * 1.2, 1.0);
      } else if (g(i) * prev_grad(i) < 0) {
        step(i) = std::max(step(i) * 0.5, 1e-9);
        g(i) = 0.0;
      }
      if (g(i) > 0) t(i) += step(i);
      else if (g(i) < 0) t(i) -= step(i);
      t(i) = std::clamp(t(i), lo(i), hi(i));
    }
    prev_grad = g;
    if (step.maxCoeff() < 1e-7) break;
  }
  return best;
}

}  // namespace

double log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const GpHyperparams& h, Eigen::Vector3d* gradient) {
  if (x.rows() != y.size()) throw std::invalid_argument("log_marginal_likelihood: size mismatch");
  return lml_impl(squared_distances(x, x), y, h, gradient);
}

GpModel GpModel::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyperparams& init,
                     const GpFitOptions& options) {
  const auto n = x.rows();
  if (n != y.size()) throw std::invalid_argument("GpModel::fit: X and Y sizes differ");
  if (n < 2) throw std::invalid_argument("GpModel::fit: need at least two training points");
  if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("GpModel::fit: non-finite data");

  GpModel m;
  m.x_mean_ = x.colwise().mean();
  m.x_scale_ = ((x.rowwise() - m.x_mean_).array().square().colwise().mean()).sqrt();
  for (Eigen::Index j = 0; j < m.x_scale_.size(); ++j)
    if (m.x_scale_(j) < 1e-12) m.x_scale_(j) = 1.0;
  if (!options.standardize_inputs) {
    m.x_mean_.setZero();
    m.x_scale_.setOnes();
  }
  m.x_ = (x.rowwise() - m.x_mean_).array().rowwise() / m.x_scale_.array();

  m.y_mean_ = y.mean();
  const double y_std = std::sqrt((y.array() - m.y_mean_).square().mean());
  if (y_std <= 1e-12 * std::max(1.0, std::abs(m.y_mean_))) {
    m.degenerate_ = true;
    m.y_scale_ = 1.0;
    m.hyper_ = {0.0, init.length_scale, options.noise_floor};
    m.alpha_ = Eigen::VectorXd::Zero(n);
    return m;
  }
  m.y_scale_ = y_std;
  const Eigen::VectorXd ys = (y.array() - m.y_mean_) / y_std;

  GpHyperparams h = init;
  h.noise_variance = std::max(h.noise_variance, options.noise_floor);
  if (options.optimize && options.iterations > 0 && options.restarts > 0) {
    // Seeded subset for the hyperparameter search.
    std::mt19937_64 rng(options.seed);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    if (options.max_points_for_hyperparams > 0 &&
        static_cast<std::size_t>(n) > options.max_points_for_hyperparams) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(options.max_points_for_hyperparams);
      std::sort(idx.begin(), idx.end());
    }
    Eigen::MatrixXd xs(static_cast<Eigen::Index>(idx.size()), m.x_.cols());
    Eigen::VectorXd yv(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      xs.row(static_cast<Eigen::Index>(i)) = m.x_.row(idx[i]);
      yv(static_cast<Eigen::Index>(i)) = ys(idx[i]);
    }
    const Eigen::MatrixXd sq = squared_distances(xs, xs);
    const Eigen::Vector3d lo(std::log(1e-4), std::log(1e-3), std::log(options.noise_floor));
    const Eigen::Vector3d hi(std::log(1e4), std::log(1e4), std::log(10.0));
    const Eigen::Vector3d t0 = to_log(h).cwiseMax(lo).cwiseMin(hi);
    std::uniform_real_distribution<double> jitter(-1.5, 1.5);
    double best_lml = -std::numeric_limits<double>::infinity();
    Eigen::Vector3d best = t0;
    for (int r = 0; r < options.restarts; ++r) {
      Eigen::Vector3d start = t0;
      if (r > 0)
        for (int i = 0; i < 3; ++i) start(i) = std::clamp(t0(i) + jitter(rng), lo(i), hi(i));
      double v = 0.0;
      const auto t = ascend(sq, yv, start, lo, hi, options.iterations, v);
      if (v > best_lml) {
        best_lml = v;
        best = t;
      }
    }
    h = from_log(best);
  }

  const Eigen::MatrixXd sq = squared_distances(m.x_, m.x_);
  const Eigen::MatrixXd kf = rbf(sq, h);
  auto f = factorize(kf, h.noise_variance);
  if (!f) throw NumericalHealthError("GP covariance is not positive definite even with jitter 1e-6");
  m.hyper_ = h;
  m.llt_ = std::move(f->llt);
  m.jitter_ = f->jitter;
  m.alpha_ = m.llt_.solve(ys);
  const Eigen::MatrixXd& l = m.llt_.matrixLLT();
  m.lml_ = -0.5 * ys.dot(m.alpha_) - l.diagonal().array().log().sum() -
           0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  return m;
}

Eigen::RowVectorXd GpModel::standardize(const Eigen::VectorXd& x) const {
  return (x.transpose() - x_mean_).array() / x_scale_.array();
}

GpPrediction GpModel::predict(const Eigen::VectorXd& x, bool with_noise) const {
  Eigen::VectorXd mean, sd;
  predict_batch(x.transpose(), mean, sd, with_noise);
  return {mean(0), sd(0)};
}

void GpModel::predict_batch(const Eigen::MatrixXd& x, Eigen::VectorXd& mean,
                            Eigen::VectorXd& stddev, bool with_noise) const {
  if (x.cols() != x_mean_.size())
    throw std::invalid_argument("GpModel::predict: expected " + std::to_string(x_mean_.size()) +
                                " features, got " + std::to_string(x.cols()));
  const auto m = x.rows();
  if (degenerate_) {
    mean = Eigen::VectorXd::Constant(m, y_mean_);
    stddev = Eigen::VectorXd::Zero(m);
    return;
  }
  const Eigen::MatrixXd xs = (x.rowwise() - x_mean_).array().rowwise() / x_scale_.array();
  const Eigen::MatrixXd ks = rbf(squared_distances(xs, x_), hyper_);  // m x n
  mean = (ks * alpha_).array() * y_scale_ + y_mean_;
  const Eigen::MatrixXd v = llt_.matrixL().solve(ks.transpose());
  Eigen::VectorXd var = hyper_.signal_variance - v.colwise().squaredNorm().transpose().array();
  if (var.minCoeff() < -1e-8)
    throw NumericalHealthError("GP posterior variance " + std::to_string(var.minCoeff()) +
                               " below clamp tolerance");
  var = var.cwiseMax(0.0);
  if (with_noise) var.array() += hyper_.noise_variance;
  stddev = var.array().sqrt() * y_scale_;
}

}  // namespace prefix_dse
