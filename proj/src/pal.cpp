#include "prefix_dse/pal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>

#include "prefix_dse/hashing.hpp"

namespace prefix_dse {

UncertaintyRegion UncertaintyRegion::unbounded(std::size_t dims) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Objectives(dims, -inf), Objectives(dims, inf)};
}

double UncertaintyRegion::diagonal() const {
  double s = 0.0;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    const double w = upper[i] - lower[i];
    if (std::isfinite(w)) s += w * w;
  }
  return std::sqrt(s);
}

bool UncertaintyRegion::contains(const UncertaintyRegion& inner) const {
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (inner.lower[i] < lower[i] || inner.upper[i] > upper[i]) return false;
  return true;
}

UncertaintyRegion hyper_rectangle(std::span<const double> mean, std::span<const double> stddev,
                                  double beta) {
  if (mean.size() != stddev.size()) throw std::invalid_argument("hyper_rectangle: size mismatch");
  if (!(beta > 0.0)) throw std::invalid_argument("hyper_rectangle: beta must be positive");
  const double r = std::sqrt(beta);
  UncertaintyRegion box;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (stddev[i] < 0.0) throw std::invalid_argument("hyper_rectangle: negative stddev");
    box.lower.push_back(mean[i] - r * stddev[i]);
    box.upper.push_back(mean[i] + r * stddev[i]);
  }
  return box;
}

UncertaintyRegion intersect(const UncertaintyRegion& a, const UncertaintyRegion& b) {
  if (a.lower.size() != b.lower.size()) throw std::invalid_argument("intersect: size mismatch");
  UncertaintyRegion r = a;
  for (std::size_t i = 0; i < a.lower.size(); ++i) {
    double lo = std::max(a.lower[i], b.lower[i]);
    double hi = std::min(a.upper[i], b.upper[i]);
    if (lo > hi) {
      const double face = b.lower[i] > a.upper[i] ? a.upper[i] : a.lower[i];
      lo = hi = face;
    }
    r.lower[i] = lo;
    r.upper[i] = hi;
  }
  return r;
}

PalState::PalState(std::size_t designs, std::size_t dims)
    : cls(designs, PalClass::kUnclassified),
      regions(designs, UncertaintyRegion::unbounded(dims)),
      sampled(designs, false) {}

std::size_t PalState::count(PalClass c) const {
  return static_cast<std::size_t>(std::count(cls.begin(), cls.end(), c));
}

namespace {

// a + delta (componentwise) dominates b.
bool dominates_shifted(const Objectives& a, double delta, const Objectives& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = a[i] + delta;
    if (v > b[i]) return false;
    if (v < b[i]) strict = true;
  }
  return strict;
}

}  // namespace

void classify(PalState& state, double delta) {
  const std::size_t n = state.cls.size();
  std::vector<std::size_t> active;  // P and U, as of the start of this pass
  for (std::size_t i = 0; i < n; ++i)
    if (state.cls[i] != PalClass::kNonPareto) active.push_back(i);

  std::vector<PalClass> next = state.cls;
  for (std::size_t x : active) {
    if (state.cls[x] != PalClass::kUnclassified) continue;
    const auto& rx = state.regions[x];
    bool non_pareto = false;
    bool pareto = true;
    for (std::size_t y : active) {
      if (y == x) continue;
      const auto& ry = state.regions[y];
      if (dominates_shifted(ry.upper, delta, rx.lower)) {
        non_pareto = true;
        break;
      }
      if (pareto && dominates_shifted(ry.lower, delta, rx.upper)) pareto = false;
    }
    if (non_pareto) next[x] = PalClass::kNonPareto;
    else if (pareto) next[x] = PalClass::kPareto;
  }
  state.cls = std::move(next);
}

std::vector<std::size_t> select_samples(const PalState& state, std::size_t batch_size) {
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < state.cls.size(); ++i)
    if (state.cls[i] != PalClass::kNonPareto && !state.sampled[i])
      cand.emplace_back(state.regions[i].diagonal(), i);
  std::stable_sort(cand.begin(), cand.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < std::min(batch_size, cand.size()); ++k) out.push_back(cand[k].second);
  return out;
}

std::vector<Objectives> PalResult::values_of(std::span<const std::size_t> ids) const {
  std::vector<Objectives> out;
  for (auto id : ids) {
    const auto it = std::lower_bound(labeled.begin(), labeled.end(), id);
    if (it == labeled.end() || *it != id)
      throw std::out_of_range("design " + std::to_string(id) + " has no true value");
    out.push_back(labels[static_cast<std::size_t>(it - labeled.begin())]);
  }
  return out;
}

PalResult run_pal(const std::vector<DesignInstance>& space, Oracle& oracle,
                  std::span<const Objective> objectives, const PalConfig& cfg,
                  const PalTraceSink& trace) {
  const std::size_t n = space.size();
  const std::size_t dims = objectives.size();
  if (n < 2) throw std::invalid_argument("PAL needs at least two designs");
  if (dims < 1) throw std::invalid_argument("PAL needs at least one objective");
  if (cfg.init_size < 2 || cfg.init_size > n)
    throw std::invalid_argument("init size must be in [2, " + std::to_string(n) + "]");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
  if (!(cfg.beta > 0.0) || !(cfg.delta >= 0.0))
    throw std::invalid_argument("beta must be positive and delta non-negative");

  const auto nf = space.front().features.values().size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nf));
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = space[i].features.values();
    if (v.size() != nf) throw std::invalid_argument("feature vectors differ in length");
    for (std::size_t j = 0; j < nf; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
  }

  const auto start_counts = oracle.counts();
  PalState state(n, dims);
  std::vector<std::optional<Objectives>> truth(n);
  auto label = [&](std::size_t i, CallClass c) {
    truth[i] = project(oracle.evaluate(space[i], c), objectives);
    state.sampled[i] = true;
  };

  std::mt19937_64 rng(cfg.rng_seed);
  {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(cfg.init_size);
    std::sort(order.begin(), order.end());
    for (auto i : order) label(i, CallClass::kInit);
  }

  std::vector<GpHyperparams> hyper(dims);
  bool first_fit = true;
  while (state.count(PalClass::kUnclassified) > 0 && state.t < cfg.t_max) {
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < n; ++i)
      if (state.sampled[i]) train.push_back(i);
    Eigen::MatrixXd xt(static_cast<Eigen::Index>(train.size()), x.cols());
    for (std::size_t r = 0; r < train.size(); ++r) xt.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(train[r]));

    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < n; ++i)
      if (state.cls[i] != PalClass::kNonPareto) live.push_back(i);
    Eigen::MatrixXd xl(static_cast<Eigen::Index>(live.size()), x.cols());
    for (std::size_t r = 0; r < live.size(); ++r) xl.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(live[r]));

    std::vector<Eigen::VectorXd> mean(dims), sd(dims);
    for (std::size_t k = 0; k < dims; ++k) {
      Eigen::VectorXd yt(static_cast<Eigen::Index>(train.size()));
      for (std::size_t r = 0; r < train.size(); ++r) yt(static_cast<Eigen::Index>(r)) = (*truth[train[r]])[k];
      GpFitOptions opt = first_fit ? cfg.gp_initial : cfg.gp_refit;
      opt.seed = hash_mix(cfg.rng_seed ^ (static_cast<std::uint64_t>(state.t) << 8) ^ k);
      const auto model = GpModel::fit(xt, yt, first_fit ? GpHyperparams{} : hyper[k], opt);
      if (!model.degenerate()) hyper[k] = model.hyperparams();
      model.predict_batch(xl, mean[k], sd[k], cfg.noisy_regions);
    }
    first_fit = false;

    std::vector<double> m(dims), s(dims);
    for (std::size_t r = 0; r < live.size(); ++r) {
      for (std::size_t k = 0; k < dims; ++k) {
        m[k] = mean[k](static_cast<Eigen::Index>(r));
        s[k] = sd[k](static_cast<Eigen::Index>(r));
      }
      auto& reg = state.regions[live[r]];
      reg = intersect(reg, hyper_rectangle(m, s, cfg.beta));
    }
    classify(state, cfg.delta);

    PalIterationTrace tr;
    tr.t = state.t;
    tr.sampled = select_samples(state, cfg.batch_size);
    for (auto i : tr.sampled) tr.max_diagonal = std::max(tr.max_diagonal, state.regions[i].diagonal());
    tr.pareto = state.count(PalClass::kPareto);
    tr.non_pareto = state.count(PalClass::kNonPareto);
    tr.unclassified = state.count(PalClass::kUnclassified);
    if (trace) trace(tr, state);
    if (tr.sampled.empty()) break;
    for (auto i : tr.sampled) label(i, CallClass::kActiveSample);
    ++state.t;
  }

  PalResult result;
  for (std::size_t i = 0; i < n; ++i)
    if (state.cls[i] == PalClass::kPareto) result.predicted.push_back(i);
  if (!cfg.strict && state.count(PalClass::kUnclassified) > 0) {
    // Residual U: keep designs whose pessimistic corner is non-dominated
    // among the pessimistic corners of all remaining candidates.
    std::vector<std::size_t> live;
    std::vector<Objectives> pess;
    for (std::size_t i = 0; i < n; ++i)
      if (state.cls[i] != PalClass::kNonPareto) {
        live.push_back(i);
        pess.push_back(state.regions[i].upper);
      }
    for (auto j : front_indices(pess))
      if (state.cls[live[j]] == PalClass::kUnclassified) result.predicted.push_back(live[j]);
    std::sort(result.predicted.begin(), result.predicted.end());
    result.timeout_optimistic = true;
  }
  for (auto i : result.predicted)
    if (!truth[i]) {
      truth[i] = project(oracle.evaluate(space[i], CallClass::kVerify), objectives);
    }

  std::vector<Objectives> pv;
  for (auto i : result.predicted) pv.push_back(*truth[i]);
  for (auto j : front_indices(pv)) result.frontier.push_back(result.predicted[j]);
  for (std::size_t i = 0; i < n; ++i)
    if (truth[i]) {
      result.labeled.push_back(i);
      result.labels.push_back(*truth[i]);
    }
  const auto end_counts = oracle.counts();
  result.counts = {end_counts.init - start_counts.init,
                   end_counts.active_sample - start_counts.active_sample,
                   end_counts.verify - start_counts.verify};
  result.iterations = state.t;
  result.hyperparams = hyper;
  result.final_state = std::move(state);
  return result;
}

}  // namespace prefix_dse
