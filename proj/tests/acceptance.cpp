// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "prefix_dse/alpha_sweep.hpp"
#include "prefix_dse/features.hpp"
#include "prefix_dse/gp.hpp"
#include "prefix_dse/pal.hpp"
#include "prefix_dse/pareto.hpp"
#include "prefix_dse/pgg.hpp"
#include "support/adder_oracle.hpp"
#include "support/benchmark.hpp"
#include "support/brute_force.hpp"
#include "support/fixtures.hpp"
#include "support/pareto_oracle.hpp"

using namespace prefix_dse;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string cli;
  int reps = 100;
  int batch_reps = 20;
  int strict_reps = 10;
  std::vector<int> only;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Runs fn(0..count-1) on all hardware threads; results land by index.
void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min<int>(count, static_cast<int>(std::thread::hardware_concurrency())));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void info(const std::string& s) {
  std::printf("    %s\n", s.c_str());
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// 1. Functional soundness

bool adds_correctly(const PrefixGraph& g, int pairs, std::uint64_t seed) {
  const int n = g.bit_width();
  if (n <= 8) {
    for (std::uint64_t a = 0; a < (1ULL << n); ++a)
      for (std::uint64_t b = 0; b < (1ULL << n); ++b)
        if (simulate_add(g, a, b) != oracle::reference_add(n, a, b)) return false;
    return true;
  }
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> a(static_cast<std::size_t>(pairs)), b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng() & oracle::mask(n);
    b[i] = rng() & oracle::mask(n);
  }
  const auto got = simulate_add_batch(g, a, b);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (got[i] != oracle::reference_add(n, a[i], b[i])) return false;
  return true;
}

Outcome criterion1(const Options&) {
  const auto t0 = Clock::now();
  std::size_t checked = 0, bad = 0;
  // The bit-sliced simulator must agree with the scalar one before it is
  // trusted for the large pools.
  bool batch_agrees = true;
  for (auto kind : {RegularKind::kKoggeStone, RegularKind::kSklansky, RegularKind::kBrentKung, RegularKind::kRipple})
    for (int n : {4, 8, 16, 32, 64}) {
      const auto g = make_regular(kind, n);
      ++checked;
      std::mt19937_64 rng(static_cast<std::uint64_t>(n));
      for (int i = 0; i < 10000 && n > 8; ++i) {
        const auto a = rng() & oracle::mask(n), b = rng() & oracle::mask(n);
        if (simulate_add(g, a, b) != oracle::reference_add(n, a, b)) {
          ++bad;
          break;
        }
      }
      if (n <= 8 && !adds_correctly(g, 0, 0)) ++bad;
      std::vector<std::uint64_t> a(256), b(256);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng() & oracle::mask(n), b[i] = rng() & oracle::mask(n);
      const auto r = simulate_add_batch(g, a, b);
      for (std::size_t i = 0; i < a.size(); ++i) batch_agrees = batch_agrees && r[i] == simulate_add(g, a[i], b[i]);
    }
  info(fmt("regular adders: %zu checked, %zu wrong", checked, bad));

  const std::vector<std::pair<int, std::vector<int>>> runs{
      {4, {2, 3, 4}}, {8, {2, 3, 4, 5, 6, 7, 8}}, {16, {4, 8, 16}}, {32, {8, 32}}, {64, {16, 64}}};
  std::size_t graphs = 0;
  for (const auto& [n, mfos] : runs)
    for (int mfo : mfos) {
      EnumConfig cfg;
      cfg.bit_width = n;
      cfg.mfo_limit = mfo;
      SolutionPool pool;
      try {
        pool = enumerate_widening(cfg, 3);
      } catch (const EnumerationError& e) {
        info(fmt("n=%d mfo=%d: no graphs (%s)", n, mfo, e.what()));
        continue;
      }
      std::size_t wrong = 0, k = 0;
      for (const auto& g : pool.flatten()) {
        if (!adds_correctly(g, 10000, 1000 + k)) ++wrong;
        if (k < 3) {
          std::mt19937_64 rng(k);
          for (int i = 0; i < 200; ++i) {
            const auto a = rng() & oracle::mask(n), b = rng() & oracle::mask(n);
            batch_agrees = batch_agrees && simulate_add(g, a, b) == simulate_add_batch(g, std::vector{a}, std::vector{b})[0];
          }
        }
        ++k;
      }
      graphs += k;
      bad += wrong;
      info(fmt("n=%d mfo=%d: %zu graphs, %zu wrong", n, mfo, k, wrong));
    }
  const double t = seconds_since(t0);
  const bool pass = bad == 0 && batch_agrees && t < 60.0;
  return {pass, fmt("%zu generated graphs + %zu regular adders, %zu failures, batch==scalar %s, %.1fs (limit 60s)",
                    graphs, checked, bad, batch_agrees ? "yes" : "no", t)};
}

// ---------------------------------------------------------------------------
// 2. Pruning non-degradation

int pruned_min(int n, int mfo, bool pruning) {
  EnumConfig cfg;
  cfg.bit_width = n;
  cfg.mfo_limit = mfo;
  if (!pruning) {
    cfg.semi_regular = false;
    cfg.trivial_level_restriction = false;
    cfg.per_width_depth = false;
  }
  try {
    return enumerate_widening(cfg, 3).min_size(mfo);
  } catch (const EnumerationError&) {
    return -1;
  }
}

Outcome criterion2(const Options&) {
  const auto t0 = Clock::now();
  int mismatches = 0, unpruned_mismatches = 0, cases = 0;
  std::string failing;
  for (int n : {4, 8})
    for (int mfo = 2; mfo <= n; ++mfo) {
      const int bf = bf::MinSizeSearch({n, mfo, false, 0}).run();
      const int pr = pruned_min(n, mfo, true);
      const int up = pruned_min(n, mfo, false);
      ++cases;
      if (pr != bf) {
        ++mismatches;
        failing += fmt(" (n=%d,mfo=%d: %d vs %d)", n, mfo, pr, bf);
      }
      if (up != bf) ++unpruned_mismatches;
      info(fmt("n=%d mfo=%d brute force %d, pruned %d, pruning off %d", n, mfo, bf, pr, up));
    }
  const double t = seconds_since(t0);
  info(fmt("with every pruning rule off the engine matches brute force in %d/%d cases", cases - unpruned_mismatches, cases));
  return {mismatches == 0 && t < 300.0,
          fmt("%d/%d cases match brute force%s, %.1fs (limit 300s)", cases - mismatches, cases,
              failing.empty() ? "" : (", mismatches:" + failing).c_str(), t)};
}

// ---------------------------------------------------------------------------
// 3. Size targets at 64 bits

Outcome criterion3(const Options&) {
  auto t0 = Clock::now();
  EnumConfig cfg;
  cfg.bit_width = 64;
  cfg.mfo_limit = 32;
  int s32 = -1;
  try {
    s32 = enumerate_widening(cfg, 3).min_size(32);
  } catch (const EnumerationError& e) {
    info(fmt("mfo 32 enumeration failed: %s", e.what()));
  }
  const double t32 = seconds_since(t0);
  info(fmt("mfo 32: size %d in %.1fs (target 185 within 10s)", s32, t32));

  // mfo 16: widen the bucket capacity until the target or the time budget.
  t0 = Clock::now();
  int s16 = -1;
  for (int cap : {1024, 4096, 16384, 65536}) {
    EnumConfig c;
    c.bit_width = 64;
    c.mfo_limit = 16;
    c.size_bucket_capacity = cap;
    if (cap > 1024) c.size_slack = 6;
    try {
      const int s = enumerate_widening(c, 3).min_size(16);
      if (s > 0 && (s16 < 0 || s < s16)) s16 = s;
    } catch (const EnumerationError& e) {
      info(fmt("mfo 16 cap %d failed: %s", cap, e.what()));
    }
    info(fmt("mfo 16: bucket cap %d, best so far %d, %.1fs", cap, s16, seconds_since(t0)));
    if ((s16 > 0 && s16 <= 191) || seconds_since(t0) > 600.0) break;
  }
  const double t16 = seconds_since(t0);

  const std::map<int, int> targets{{4, 244}, {6, 233}, {8, 222}, {12, 201}};
  for (const auto& [mfo, target] : targets) {
    const auto t1 = Clock::now();
    EnumConfig c;
    c.bit_width = 64;
    c.mfo_limit = mfo;
    try {
      const int s = enumerate_widening(c, 3).min_size(mfo);
      info(fmt("best effort mfo %d: size %d (target %d, %s), %.1fs", mfo, s, target,
               s <= target ? "met" : "missed", seconds_since(t1)));
    } catch (const std::exception& e) {
      info(fmt("best effort mfo %d: terminated without a graph (%s)", mfo, e.what()));
    }
  }
  const bool ok32 = s32 > 0 && s32 <= 185 && t32 < 10.0;
  const bool ok16 = s16 > 0 && s16 <= 191 && t16 < 900.0;
  return {ok32 && ok16, fmt("mfo32 size %d in %.1fs [%s]; mfo16 size %d in %.1fs [%s]", s32, t32,
                            ok32 ? "ok" : "miss", s16, t16, ok16 ? "ok" : "miss")};
}

// ---------------------------------------------------------------------------
// 4. spfo golden values

Outcome criterion4(const Options&) {
  const auto ex = fixtures::spfo_example();
  const std::vector<std::pair<NodeId, std::int64_t>> want{{ex.o1, 2}, {ex.b1, 3}, {ex.b2, 3}, {ex.o3, 10}, {ex.o5, 19}};
  std::string got;
  bool pass = true;
  for (const auto& [id, v] : want) {
    const auto s = spfo(ex.graph, id);
    pass = pass && s == v;
    got += fmt(" %lld", static_cast<long long>(s));
  }
  return {pass, "spfo(o1,b1,b2,o3,o5) =" + got + " (want 2 3 3 10 19)"};
}

// ---------------------------------------------------------------------------
// 5. GP numerical health

Eigen::MatrixXd normal_matrix(std::mt19937_64& rng, int n, int d) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = g(rng);
  return x;
}

Outcome criterion5(const Options&) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  double worst_grad = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = 10 + t, d = 1 + t % 5;
    const auto x = normal_matrix(rng, n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = std::sin(x(i, 0)) + 0.2 * u(rng);
    const Eigen::Vector3d th(u(rng), 0.5 * u(rng) + 0.3, std::log(0.05) + u(rng));
    auto h = [](const Eigen::Vector3d& v) { return GpHyperparams{std::exp(v(0)), std::exp(v(1)), std::exp(v(2))}; };
    Eigen::Vector3d grad;
    log_marginal_likelihood(x, y, h(th), &grad);
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d a = th, b = th;
      a(k) += 1e-5;
      b(k) -= 1e-5;
      const double fd = (log_marginal_likelihood(x, y, h(a)) - log_marginal_likelihood(x, y, h(b))) / 2e-5;
      worst_grad = std::max(worst_grad, std::abs(fd - grad(k)) / std::max(1.0, std::abs(fd)));
    }
  }

  double worst_interp = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int d = 1 + t % 3;
    const auto x = normal_matrix(rng, 25, d);
    Eigen::VectorXd y = x.col(0).array().sin() + x.col(d - 1).array() * 0.5;
    GpFitOptions o;
    o.optimize = false;
    o.noise_floor = 1e-12;
    const auto m = GpModel::fit(x, y, {1.0, 0.3, 1e-12}, o);
    Eigen::VectorXd mean, sd;
    m.predict_batch(x, mean, sd);
    worst_interp = std::max(worst_interp, (mean - y).cwiseAbs().maxCoeff());
  }

  // The clamp check raises NumericalHealthError whenever a raw variance
  // falls below -1e-8; drive it with near-duplicates and tiny noise, and
  // with fitted models on the benchmark features.
  int clamp_fired = 0, fits = 0;
  for (int t = 0; t < 30; ++t) {
    auto x = normal_matrix(rng, 60, 3);
    for (int i = 30; i < 60; ++i) x.row(i) = x.row(i - 30).array() + 1e-9;
    const Eigen::VectorXd y = x.col(0).array().sin();
    GpFitOptions o;
    o.noise_floor = 1e-10;
    try {
      const auto m = GpModel::fit(x, y, {1.0, 2.0, 1e-10}, o);
      Eigen::VectorXd mean, sd;
      m.predict_batch(normal_matrix(rng, 300, 3), mean, sd);
      m.predict_batch(x, mean, sd);
      ++fits;
    } catch (const NumericalHealthError&) {
      ++clamp_fired;
    }
  }
  const auto b = bench::make_benchmark();
  Eigen::MatrixXd xf(static_cast<Eigen::Index>(b.space.size()), 36);
  for (std::size_t i = 0; i < b.space.size(); ++i) {
    const auto v = b.space[i].features.values();
    for (std::size_t j = 0; j < v.size(); ++j) xf(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
  }
  for (int obj = 0; obj < 3; ++obj) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < xf.rows(); i += 8) rows.push_back(i);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
      y(static_cast<Eigen::Index>(r)) = get(b.truth[static_cast<std::size_t>(rows[r])].ppa, static_cast<Objective>(obj));
    try {
      GpFitOptions o;
      o.max_points_for_hyperparams = 128;
      const auto m = GpModel::fit(xf(rows, Eigen::all), y, {}, o);
      Eigen::VectorXd mean, sd;
      m.predict_batch(xf, mean, sd);
      ++fits;
    } catch (const NumericalHealthError&) {
      ++clamp_fired;
    }
  }
  const double t = seconds_since(t0);
  const bool pass = worst_grad < 1e-4 && worst_interp < 1e-6 && clamp_fired == 0 && t < 120.0;
  return {pass, fmt("max gradient rel err %.2e (<1e-4), max interpolation err %.2e (<1e-6), clamp fired %d/%d, %.1fs",
                    worst_grad, worst_interp, clamp_fired, fits + clamp_fired, t)};
}

// ---------------------------------------------------------------------------
// 6. Pareto and hypervolume oracles

Outcome criterion6(const Options&) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 6);
  int front_bad = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t d = t % 2 ? 3 : 2;
    std::vector<Objectives> pts(1 + rng() % 150, Objectives(d));
    for (auto& p : pts)
      for (auto& v : p) v = t % 3 == 0 ? coarse(rng) : u(rng);
    std::vector<ParetoPoint> labeled;
    for (std::size_t i = 0; i < pts.size(); ++i) labeled.push_back({i, pts[i]});
    std::vector<std::size_t> got;
    for (const auto& p : extract_front(labeled).points) got.push_back(p.id);
    std::sort(got.begin(), got.end());
    if (got != oracle::brute_front(pts)) ++front_bad;
  }
  int hv_bad = 0, fronts = 0;
  double worst = 0.0;
  while (fronts < 50) {
    const std::size_t d = fronts % 2 ? 3 : 2;
    std::vector<Objectives> pts(5 + rng() % 30, Objectives(d));
    for (auto& p : pts)
      for (auto& v : p) v = u(rng);
    std::vector<Objectives> front;
    for (auto i : oracle::brute_front(pts)) front.push_back(pts[i]);
    const auto ref = reference_point(pts);
    const double exact = hypervolume(front, ref);
    if (!(exact > 0.0)) continue;
    const double grid = oracle::grid_volume(front, ref, d == 2 ? 100000 : 2000);
    const double rel = std::abs(grid - exact) / exact;
    worst = std::max(worst, rel);
    if (rel > 0.01) ++hv_bad;
    ++fronts;
  }
  const double t = seconds_since(t0);
  return {front_bad == 0 && hv_bad == 0 && t < 120.0,
          fmt("front mismatches %d/500, hypervolume outside 1%% %d/50 (worst %.3f%%), %.1fs", front_bad, hv_bad,
              100.0 * worst, t)};
}

// ---------------------------------------------------------------------------
// 7-9. Exploration on the 2000-design benchmark

struct SpaceTruth {
  SweepSpace space;
  std::vector<Objective> objs;
  std::vector<Objectives> front;
  Objectives ref;
};

struct Shared {
  bench::Benchmark b;
  std::vector<SpaceTruth> spaces;
  // mean PAL eta per space from criterion 7
  std::map<SweepSpace, double> pal_eta;
  bool have_pal = false;
};

Shared& shared() {
  static Shared s = [] {
    Shared x;
    x.b = bench::make_benchmark();
    for (auto sp : {SweepSpace::kAD, SweepSpace::kPD, SweepSpace::kPPA}) {
      SpaceTruth st{sp, objectives_of(sp), {}, {}};
      std::vector<Objectives> all;
      for (const auto& r : x.b.truth) all.push_back(project(r.ppa, st.objs));
      st.ref = reference_point(all);
      for (auto i : front_indices(all)) st.front.push_back(all[i]);
      x.spaces.push_back(st);
    }
    return x;
  }();
  return s;
}

std::size_t pal_init(SweepSpace sp) { return sp == SweepSpace::kPPA ? 700 : 250; }

PalResult pal_run(SweepSpace sp, std::uint64_t seed, std::size_t batch = 1, bool strict = false) {
  auto& s = shared();
  SyntheticOracle o(7);  // same noise stream as the ground truth
  PalConfig cfg;
  cfg.init_size = pal_init(sp);
  cfg.rng_seed = seed;
  cfg.batch_size = batch;
  cfg.strict = strict;
  return run_pal(s.b.space, o, objectives_of(sp), cfg);
}

Outcome criterion7(const Options& opt) {
  const auto t0 = Clock::now();
  auto& s = shared();
  bool eta_ok = true, calls_ok = true;
  std::string detail;
  for (const auto& st : s.spaces) {
    std::vector<double> pev(opt.reps), aev(opt.reps), pcv(opt.reps), acv(opt.reps);
    parallel_for(opt.reps, [&](int r) {
      const auto pr = pal_run(st.space, static_cast<std::uint64_t>(r));
      pev[r] = hv_error(st.front, pr.values_of(pr.predicted), st.ref);
      pcv[r] = static_cast<double>(pr.counts.total());
      SyntheticOracle o(7);
      SweepConfig sc;
      sc.space = st.space;
      sc.rng_seed = static_cast<std::uint64_t>(r);
      const auto ar = sweep(s.b.truth, s.b.space, sc, o);
      std::vector<Objectives> fv;
      for (auto i : ar.frontier) fv.push_back(project(s.b.truth[i].ppa, st.objs));
      aev[r] = hv_error(st.front, fv, st.ref);
      acv[r] = static_cast<double>(ar.counts.total());
    });
    double pe = 0, ae = 0, pc = 0, ac = 0;
    for (int r = 0; r < opt.reps; ++r) pe += pev[r], ae += aev[r], pc += pcv[r], ac += acv[r];
    pe /= opt.reps, ae /= opt.reps, pc /= opt.reps, ac /= opt.reps;
    s.pal_eta[st.space] = pe;
    eta_ok = eta_ok && pe <= ae;
    calls_ok = calls_ok && pc <= 0.5 * ac;
    info(fmt("%s: PAL eta %.4f calls %.0f | alpha-sweep eta %.4f calls %.0f (%.1fs so far)",
             std::string(to_string(st.space)).c_str(), pe, pc, ae, ac, seconds_since(t0)));
    detail += fmt("%s eta %.3f vs %.3f calls %.0f vs %.0f; ", std::string(to_string(st.space)).c_str(), pe, ae, pc, ac);
  }
  s.have_pal = true;
  const double t = seconds_since(t0);
  return {eta_ok && calls_ok && t < 1800.0,
          detail + fmt("eta ordering %s, calls <= 50%% %s, %d reps, %.0fs (limit 1800s)", eta_ok ? "ok" : "violated",
                       calls_ok ? "ok" : "violated", opt.reps, t)};
}

Outcome criterion8(const Options& opt) {
  auto& s = shared();
  if (!s.have_pal) {
    for (const auto& st : s.spaces) {
      std::vector<double> ev(opt.reps);
      parallel_for(opt.reps, [&](int r) {
        const auto pr = pal_run(st.space, static_cast<std::uint64_t>(r));
        ev[r] = hv_error(st.front, pr.values_of(pr.predicted), st.ref);
      });
      double pe = 0;
      for (double e : ev) pe += e;
      s.pal_eta[st.space] = pe / opt.reps;
    }
  }
  double worst = 0.0;
  for (const auto& [sp, e] : s.pal_eta) worst = std::max(worst, e);

  int dominated = 0, runs = 0;
  for (const auto& st : s.spaces) {
    std::vector<int> bad(opt.strict_reps, 0);
    parallel_for(opt.strict_reps, [&](int r) {
      const auto pr = pal_run(st.space, static_cast<std::uint64_t>(1000 + r), 1, true);
      const auto mine = pr.values_of(pr.predicted);
      for (const auto& v : mine)
        for (const auto& w : pr.labels)
          if (dominates(w, v)) bad[r] = 1;
    });
    runs += opt.strict_reps;
    for (int b : bad) dominated += b;
  }
  info(fmt("strict mode: %d/%d runs returned a design dominated by a verified one", dominated, runs));
  return {worst <= 0.15 && dominated == 0,
          fmt("mean eta AD %.3f PD %.3f PPA %.3f (max %.3f <= 0.15); strict dominated runs %d/%d",
              s.pal_eta[SweepSpace::kAD], s.pal_eta[SweepSpace::kPD], s.pal_eta[SweepSpace::kPPA], worst, dominated, runs)};
}

Outcome criterion9(const Options& opt) {
  auto& s = shared();
  const auto& st = s.spaces[1];  // PD
  std::vector<double> its, etas;
  for (std::size_t batch = 1; batch <= 5; ++batch) {
    std::vector<double> itv(opt.batch_reps), etav(opt.batch_reps);
    parallel_for(opt.batch_reps, [&](int r) {
      const auto pr = pal_run(st.space, static_cast<std::uint64_t>(r), batch);
      itv[r] = pr.iterations;
      etav[r] = hv_error(st.front, pr.values_of(pr.predicted), st.ref);
    });
    double it = 0, eta = 0;
    for (int r = 0; r < opt.batch_reps; ++r) it += itv[r], eta += etav[r];
    its.push_back(it / opt.batch_reps);
    etas.push_back(eta / opt.batch_reps);
    info(fmt("batch %zu: mean iterations %.2f, mean eta %.4f", batch, its.back(), etas.back()));
  }
  bool non_increasing = true;
  for (std::size_t i = 1; i < its.size(); ++i) non_increasing = non_increasing && its[i] <= its[i - 1];
  const double range = *std::max_element(etas.begin(), etas.end()) - *std::min_element(etas.begin(), etas.end());
  return {non_increasing && range < 0.03,
          fmt("iterations %s, eta range %.4f (< 0.03), %d reps per batch size", non_increasing ? "non-increasing" : "increase",
              range, opt.batch_reps)};
}

// ---------------------------------------------------------------------------
// 10. CLI determinism

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion10(const Options& opt) {
  if (opt.cli.empty() || !fs::exists(opt.cli)) return {false, "prefix-dse binary not given (--cli)"};
  const auto root = fs::temp_directory_path() / fs::path("prefix_dse_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::string> steps{
      "generate --n 16 --mfo 8 --out pool",
      "features --pool pool --out features.csv",
      "evaluate --features features.csv --seed 3 --out data.csv",
      "explore pal --features features.csv --objectives delay,power --init 40 --tmax 5 --seed 11 --out pal",
      "explore pal --features features.csv --objectives area,power,delay --init 60 --tmax 3 --batch 2 --seed 4 --out pal3",
      "explore alpha --features features.csv --dataset data.csv --objectives delay,power --training-size 100 --seed 2 --out alpha",
      "report --runs pal pal3 alpha --truth data.csv --out report.csv"};
  for (const char* tag : {"a", "b"}) {
    const auto dir = root / tag;
    fs::create_directories(dir);
    for (const auto& step : steps) {
      const std::string cmd = "cd '" + dir.string() + "' && '" + fs::absolute(opt.cli).string() + "' " + step + " > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + step};
    }
  }
  std::size_t files = 0, csv = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "a");
    ++files;
    if (e.path().extension() == ".csv") ++csv;
    if (slurp(e.path()) != slurp(root / "b" / rel)) {
      ++differ;
      info("differs: " + rel.string());
    }
  }
  fs::remove_all(root);
  return {differ == 0 && csv > 0,
          fmt("%zu files (%zu CSV) from %zu commands compared across two runs, %zu differ", files, csv, steps.size(), differ)};
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Acceptance checks"};
  app.add_option("--cli", opt.cli, "Path to the prefix-dse binary");
  app.add_option("--reps", opt.reps, "Paired repetitions for the exploration comparison")->capture_default_str();
  app.add_option("--batch-reps", opt.batch_reps, "Repetitions per batch size")->capture_default_str();
  app.add_option("--strict-reps", opt.strict_reps, "Strict-mode runs per space")->capture_default_str();
  app.add_option("--only", opt.only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome(const Options&)>> checks{
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9, criterion10};
  int passed = 0, run = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
    ++run;
    Outcome o;
    try {
      o = checks[i](opt);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    passed += o.pass;
    std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%d criteria passed\n", passed, run);
  return passed == run ? 0 : 1;
}
