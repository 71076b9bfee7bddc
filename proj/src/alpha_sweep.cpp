#include "prefix_dse/alpha_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Cholesky>

namespace prefix_dse {

std::string_view to_string(SweepSpace s) {
  switch (s) {
    case SweepSpace::kAD: return "AD";
    case SweepSpace::kPD: return "PD";
    case SweepSpace::kPPA: return "PPA";
  }
  return "?";
}

SweepSpace parse_sweep_space(std::string_view name) {
  if (name == "AD" || name == "ad") return SweepSpace::kAD;
  if (name == "PD" || name == "pd") return SweepSpace::kPD;
  if (name == "PPA" || name == "ppa") return SweepSpace::kPPA;
  throw std::invalid_argument("unknown sweep space '" + std::string(name) + "'");
}

std::vector<Objective> objectives_of(SweepSpace s) {
  switch (s) {
    case SweepSpace::kAD: return {Objective::kArea, Objective::kDelay};
    case SweepSpace::kPD: return {Objective::kPower, Objective::kDelay};
    case SweepSpace::kPPA: return {Objective::kArea, Objective::kPower, Objective::kDelay};
  }
  return {};
}

SweepSpace space_for(std::span<const Objective> objectives) {
  auto has = [&](Objective o) { return std::find(objectives.begin(), objectives.end(), o) != objectives.end(); };
  if (!has(Objective::kDelay))
    throw std::invalid_argument("scalarized spaces always include delay");
  if (objectives.size() == 3) return SweepSpace::kPPA;
  if (objectives.size() == 2 && has(Objective::kArea)) return SweepSpace::kAD;
  if (objectives.size() == 2 && has(Objective::kPower)) return SweepSpace::kPD;
  throw std::invalid_argument("objectives do not form AD, PD or PPA");
}

std::vector<double> default_alphas() {
  return {1000, 0, 100, 1.0 / 100, 50, 1.0 / 50, 20, 1.0 / 20,
          10,   1.0 / 10, 8, 1.0 / 8, 2, 1.0 / 2, 1};
}

NormBounds NormBounds::of(const std::vector<PpaPoint>& points) {
  if (points.empty()) throw std::invalid_argument("NormBounds::of: no points");
  NormBounds b;
  for (int k = 0; k < 3; ++k) {
    b.lo[k] = b.hi[k] = get(points.front(), static_cast<Objective>(k));
    for (const auto& p : points) {
      const double v = get(p, static_cast<Objective>(k));
      b.lo[k] = std::min(b.lo[k], v);
      b.hi[k] = std::max(b.hi[k], v);
    }
  }
  return b;
}

namespace {

double normalized(const PpaPoint& p, Objective o, const NormBounds& b) {
  const auto k = static_cast<std::size_t>(o);
  if (!(b.hi[k] > b.lo[k]))
    throw std::invalid_argument("degenerate normalization bounds for objective " +
                                std::string(to_string(o)));
  return (get(p, o) - b.lo[k]) / (b.hi[k] - b.lo[k]);
}

std::size_t weight_count(SweepSpace s) { return s == SweepSpace::kPPA ? 2 : 1; }

}  // namespace

double scalarize(const PpaPoint& p, SweepSpace space, std::span<const double> weights,
                 const NormBounds& bounds) {
  const auto objs = objectives_of(space);
  if (weights.size() != weight_count(space))
    throw std::invalid_argument("scalarize: " + std::string(to_string(space)) + " takes " +
                                std::to_string(weight_count(space)) + " weight(s)");
  double v = normalized(p, Objective::kDelay, bounds);
  for (std::size_t i = 0; i < weights.size(); ++i) v += weights[i] * normalized(p, objs[i], bounds);
  return v;
}

// ---------------------------------------------------------------------------
// Kernel ridge

namespace {

Eigen::MatrixXd rbf_cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double ell) {
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd d = (-2.0 * a * b.transpose()).eval();
  d.colwise() += na;
  d.rowwise() += nb.transpose();
  return (d.cwiseMax(0.0) * (-0.5 / (ell * ell))).array().exp();
}

Eigen::MatrixXd ridge_solve(Eigen::MatrixXd k, double ridge, const Eigen::MatrixXd& y) {
  k.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  for (double j = 1e-10; llt.info() != Eigen::Success && j <= 1e-4; j *= 10) {
    k.diagonal().array() += j;
    llt.compute(k);
  }
  if (llt.info() != Eigen::Success) throw std::runtime_error("kernel ridge system is not positive definite");
  return llt.solve(y);
}

}  // namespace

KernelRidge::KernelRidge(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double ridge,
                         double length_scale)
    : x_(x), length_scale_(length_scale) {
  if (x.rows() != y.rows()) throw std::invalid_argument("KernelRidge: X and Y sizes differ");
  if (!(ridge > 0.0) || !(length_scale > 0.0))
    throw std::invalid_argument("KernelRidge: ridge and length scale must be positive");
  coef_ = ridge_solve(rbf_cross(x, x, length_scale), ridge, y);
}

Eigen::MatrixXd KernelRidge::predict(const Eigen::MatrixXd& x) const {
  return rbf_cross(x, x_, length_scale_) * coef_;
}

double median_length_scale(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  const Eigen::Index stride = std::max<Eigen::Index>(1, n / 400);
  std::vector<double> d;
  for (Eigen::Index i = 0; i < n; i += stride)
    for (Eigen::Index j = i + stride; j < n; j += stride) d.push_back((x.row(i) - x.row(j)).squaredNorm());
  if (d.empty()) return 1.0;
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? std::sqrt(*mid / 2.0) : 1.0;
}

void SweepConfig::validate() const {
  if (alphas.empty()) throw std::invalid_argument("alpha list is empty");
  for (double a : alphas)
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("alphas must be non-negative");
  if (top_k < 1) throw std::invalid_argument("top_k must be at least 1");
  if (training_size < 2) throw std::invalid_argument("training size must be at least 2");
  if (ridge_grid.empty()) throw std::invalid_argument("ridge grid is empty");
  if (folds < 2) throw std::invalid_argument("need at least two folds");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    throw std::invalid_argument("holdout fraction must be in (0, 1)");
}

// ---------------------------------------------------------------------------
// Sweep

SweepResult sweep(const std::vector<EvalRecord>& dataset,
                  const std::vector<DesignInstance>& full_space, const SweepConfig& cfg,
                  Oracle& oracle) {
  cfg.validate();
  const auto objs = objectives_of(cfg.space);
  const std::size_t dims = objs.size();

  std::map<InstanceKey, std::size_t> index;
  for (std::size_t i = 0; i < full_space.size(); ++i) index.emplace(key_of(full_space[i]), i);

  std::vector<std::pair<std::size_t, PpaPoint>> labeled;
  for (const auto& r : dataset) {
    const auto it = index.find(key_of(r.design_id, r.target_delay, r.utilization));
    if (it == index.end())
      throw std::invalid_argument("dataset record for design " + std::to_string(r.design_id) +
                                  " is not in the design space");
    labeled.emplace_back(it->second, r.ppa);
  }
  if (labeled.size() < 2) throw std::invalid_argument("sweep needs at least two labeled designs");

  std::mt19937_64 rng(cfg.rng_seed);
  std::shuffle(labeled.begin(), labeled.end(), rng);
  labeled.resize(std::min(labeled.size(), cfg.training_size));
  const std::size_t n = labeled.size();

  SweepResult res;
  std::vector<PpaPoint> train_ppa;
  for (const auto& [i, p] : labeled) {
    res.training.push_back(i);
    train_ppa.push_back(p);
  }
  res.bounds = NormBounds::of(train_ppa);

  // Normalized per-objective targets; every scalarization is a linear
  // combination of these columns with weight vector (w..., 1).
  Eigen::MatrixXd y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < dims; ++k)
      y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = normalized(train_ppa[r], objs[k], res.bounds);

  std::vector<std::vector<double>> tuples;
  if (cfg.space == SweepSpace::kPPA) {
    for (double a1 : cfg.alphas)
      for (double a2 : cfg.alphas) tuples.push_back({a1, a2});
  } else {
    for (double a : cfg.alphas) tuples.push_back({a});
  }
  auto weight_vec = [&](const std::vector<double>& w) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(dims));
    for (std::size_t k = 0; k + 1 < dims; ++k) v(static_cast<Eigen::Index>(k)) = w[k];
    v(static_cast<Eigen::Index>(dims - 1)) = 1.0;
    return v;
  };
  {
    bool distinct = false;
    const Eigen::VectorXd s = y * weight_vec(tuples.front());
    for (Eigen::Index r = 1; r < s.size(); ++r) distinct |= s(r) != s(0);
    if (!distinct) throw std::invalid_argument("degenerate fit: fewer than two distinct targets");
  }

  // Per-weight predicted scores over the full space.
  std::vector<Eigen::VectorXd> scores;
  std::vector<double> chosen_ridge;
  if (cfg.predictor) {
    const auto pred = cfg.predictor(full_space);
    if (pred.size() != full_space.size())
      throw std::invalid_argument("predictor returned the wrong number of points");
    Eigen::MatrixXd f(static_cast<Eigen::Index>(pred.size()), static_cast<Eigen::Index>(dims));
    for (std::size_t i = 0; i < pred.size(); ++i)
      for (std::size_t k = 0; k < dims; ++k)
        f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
            (get(pred[i], objs[k]) - res.bounds.lo[static_cast<std::size_t>(objs[k])]) /
            (res.bounds.hi[static_cast<std::size_t>(objs[k])] - res.bounds.lo[static_cast<std::size_t>(objs[k])]);
    for (const auto& w : tuples) {
      scores.push_back(f * weight_vec(w));
      chosen_ridge.push_back(0.0);
    }
  } else {
    const auto nf = full_space.front().features.values().size();
    Eigen::MatrixXd xf(static_cast<Eigen::Index>(full_space.size()), static_cast<Eigen::Index>(nf));
    for (std::size_t i = 0; i < full_space.size(); ++i) {
      const auto v = full_space[i].features.values();
      for (std::size_t j = 0; j < nf; ++j) xf(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
    }
    Eigen::MatrixXd xt(static_cast<Eigen::Index>(n), xf.cols());
    for (std::size_t r = 0; r < n; ++r) xt.row(static_cast<Eigen::Index>(r)) = xf.row(static_cast<Eigen::Index>(res.training[r]));
    const Eigen::RowVectorXd mu = xt.colwise().mean();
    Eigen::RowVectorXd sd = ((xt.rowwise() - mu).array().square().colwise().mean()).sqrt();
    for (Eigen::Index j = 0; j < sd.size(); ++j)
      if (sd(j) < 1e-12) sd(j) = 1.0;
    xf = (xf.rowwise() - mu).array().rowwise() / sd.array();
    xt = (xt.rowwise() - mu).array().rowwise() / sd.array();
    res.length_scale = median_length_scale(xt);

    const Eigen::MatrixXd k = rbf_cross(xt, xt, res.length_scale);
    const Eigen::MatrixXd kf = rbf_cross(xf, xt, res.length_scale);
    const int folds = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cfg.folds), n));
    // Fold r holds training positions p with p % folds == r; positions are
    // already in seeded random order.
    auto rows_of = [&](int fold, bool in) {
      std::vector<Eigen::Index> rows;
      for (std::size_t p = 0; p < n; ++p)
        if ((static_cast<int>(p % static_cast<std::size_t>(folds)) == fold) != in) rows.push_back(static_cast<Eigen::Index>(p));
      return rows;
    };

    const std::size_t nl = cfg.ridge_grid.size();
    std::vector<Eigen::MatrixXd> cv(nl, Eigen::MatrixXd(y.rows(), y.cols()));
    std::vector<Eigen::MatrixXd> full(nl);
    for (std::size_t l = 0; l < nl; ++l) {
      const double lam = cfg.ridge_grid[l];
      for (int f = 0; f < folds; ++f) {
        const auto tr = rows_of(f, true);
        const auto te = rows_of(f, false);
        const Eigen::MatrixXd a = ridge_solve(k(tr, tr), lam, y(tr, Eigen::all));
        cv[l](te, Eigen::all) = k(te, tr) * a;
      }
      full[l] = kf * ridge_solve(k, lam, y);
    }
    for (const auto& w : tuples) {
      const Eigen::VectorXd wv = weight_vec(w);
      const Eigen::VectorXd target = y * wv;
      std::size_t best = 0;
      double best_err = 0.0;
      for (std::size_t l = 0; l < nl; ++l) {
        const double err = (cv[l] * wv - target).squaredNorm();
        if (l == 0 || err < best_err) {
          best = l;
          best_err = err;
        }
      }
      scores.push_back(full[best] * wv);
      chosen_ridge.push_back(cfg.ridge_grid[best]);
    }

    // Model-quality report: per-objective MSE on a seeded hold-out split.
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::mt19937_64 hrng(cfg.rng_seed ^ 0x686f6c646f7574ULL);
    std::shuffle(perm.begin(), perm.end(), hrng);
    const auto n_test = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.holdout_fraction * static_cast<double>(n))));
    if (n_test < n) {
      const std::vector<Eigen::Index> te(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
      const std::vector<Eigen::Index> tr(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
      for (std::size_t j = 0; j < dims; ++j) {
        std::size_t best = 0;
        double best_err = 0.0;
        for (std::size_t l = 0; l < nl; ++l) {
          const double err = (cv[l].col(static_cast<Eigen::Index>(j)) - y.col(static_cast<Eigen::Index>(j))).squaredNorm();
          if (l == 0 || err < best_err) {
            best = l;
            best_err = err;
          }
        }
        const Eigen::VectorXd a = ridge_solve(k(tr, tr), cfg.ridge_grid[best], y(tr, static_cast<Eigen::Index>(j)));
        const Eigen::VectorXd pred = k(te, tr) * a;
        res.holdout_mse.push_back((pred - y(te, static_cast<Eigen::Index>(j))).squaredNorm() /
                                  static_cast<double>(te.size()));
      }
    }
  }
  res.models_fitted = tuples.size();

  std::vector<bool> in_union(full_space.size(), false);
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const auto& s = scores[t];
    std::vector<std::size_t> order(full_space.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto k = std::min(cfg.top_k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double sa = s(static_cast<Eigen::Index>(a));
                        const double sb = s(static_cast<Eigen::Index>(b));
                        return sa != sb ? sa < sb : a < b;
                      });
    order.resize(k);
    for (auto i : order) in_union[i] = true;
    res.per_weight.push_back({tuples[t], chosen_ridge[t], std::move(order)});
  }

  std::map<std::size_t, PpaPoint> known;
  for (const auto& [i, p] : labeled) known.emplace(i, p);
  const auto before = oracle.counts();
  for (std::size_t i = 0; i < full_space.size(); ++i) {
    if (!in_union[i]) continue;
    res.candidates.push_back(i);
    const auto it = known.find(i);
    const PpaPoint p = it != known.end() ? it->second : oracle.evaluate(full_space[i], CallClass::kVerify);
    res.candidate_values.push_back(project(p, objs));
  }
  for (auto j : front_indices(res.candidate_values)) res.frontier.push_back(res.candidates[j]);
  std::sort(res.training.begin(), res.training.end());
  const auto after = oracle.counts();
  res.counts.init = n;
  res.counts.verify = after.verify - before.verify;
  return res;
}

}  // namespace prefix_dse
