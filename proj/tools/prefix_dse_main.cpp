// prefix-dse: enumerate prefix adders, extract features, evaluate and explore
// the PPA frontier.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "prefix_dse/alpha_sweep.hpp"
#include "prefix_dse/csv.hpp"
#include "prefix_dse/features.hpp"
#include "prefix_dse/oracle.hpp"
#include "prefix_dse/pal.hpp"
#include "prefix_dse/pareto.hpp"
#include "prefix_dse/pgg.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace prefix_dse;

namespace {

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& f : csv::split(s)) out.push_back(csv::to_real(f, 0, "list"));
  return out;
}

std::string join_objectives(const std::vector<Objective>& objs) {
  std::string s;
  for (auto o : objs) {
    if (!s.empty()) s += ',';
    s += to_string(o);
  }
  return s;
}

// P-hat rows with true values; `front` marks the Pareto subset.
void write_frontier(const fs::path& path, const std::vector<DesignInstance>& space,
                    const std::vector<std::size_t>& ids, const std::vector<Objectives>& values,
                    const std::vector<std::size_t>& front, const std::vector<Objective>& objs) {
  auto out = open_out(path);
  out << "design_id,target_delay,utilization";
  for (auto o : objs) out << ',' << to_string(o);
  out << ",on_front\n";
  const std::set<std::size_t> on(front.begin(), front.end());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto& d = space[ids[r]];
    out << d.design_id << ',' << csv::format_real(d.features.target_delay) << ','
        << csv::format_real(d.features.utilization);
    for (double v : values[r]) out << ',' << csv::format_real(v);
    out << ',' << (on.count(ids[r]) ? 1 : 0) << '\n';
  }
}

json counts_json(const CallCounts& c) {
  return {{"init", c.init}, {"active_sample", c.active_sample}, {"verify", c.verify},
          {"total", c.total()}};
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  EnumConfig cfg;
  bool no_semi_regular = false, no_trivial_rule = false, global_depth = false;
  double memory_gb = 4.0;
  int widen = 3;
  std::size_t sample = 0;
  std::uint64_t sample_seed = 0;
  fs::path out;
};

int cmd_generate(GenerateArgs& a) {
  a.cfg.semi_regular = !a.no_semi_regular;
  a.cfg.trivial_level_restriction = !a.no_trivial_rule;
  a.cfg.per_width_depth = !a.global_depth;
  a.cfg.memory_budget_bytes = static_cast<std::size_t>(a.memory_gb * (1ull << 30));
  EnumStats st;
  SolutionPool pool;
  try {
    pool = enumerate_widening(a.cfg, a.widen, &st);
  } catch (const EnumerationError& e) {
    std::cerr << "enumeration stopped: " << e.what() << " (reached " << e.bit_width_reached()
              << " bits)\n";
    return 3;
  }
  if (pool.empty()) {
    std::cerr << "no " << a.cfg.bit_width << "-bit graph survived the constraints (reached "
              << st.bit_width_reached << " bits)\n";
    return 3;
  }
  std::vector<PrefixGraph> graphs;
  bool truncated = false;
  if (a.sample > 0) {
    auto s = quasi_random_sample(pool, a.sample, a.sample_seed);
    graphs = std::move(s.graphs);
    truncated = s.truncated;
  } else {
    graphs = pool.flatten();
  }
  write_pool(a.out, graphs);
  std::printf("n=%d mfo_limit=%d min_size=%d pool=%zu written=%zu slack=%d seconds=%.2f\n",
              a.cfg.bit_width, a.cfg.mfo_limit, pool.min_size(), pool.size(), graphs.size(),
              st.slack_attempts.empty() ? a.cfg.size_slack : st.slack_attempts.back(), st.seconds);
  if (truncated) std::fprintf(stderr, "warning: pool smaller than requested sample\n");
  return 0;
}

struct FeaturesArgs {
  fs::path pool, out;
  std::string grid = "default";
  std::string target_delays, utilizations;
};

int cmd_features(const FeaturesArgs& a) {
  const auto graphs = read_pool(a.pool);
  auto grid = default_grid();
  if (a.grid != "default") throw std::invalid_argument("unknown grid '" + a.grid + "'");
  if (!a.target_delays.empty() || !a.utilizations.empty()) {
    std::vector<double> tds, uts;
    for (const auto& g : grid) {
      if (std::find(tds.begin(), tds.end(), g.target_delay) == tds.end()) tds.push_back(g.target_delay);
      if (std::find(uts.begin(), uts.end(), g.utilization) == uts.end()) uts.push_back(g.utilization);
    }
    if (!a.target_delays.empty()) tds = parse_list(a.target_delays);
    if (!a.utilizations.empty()) uts = parse_list(a.utilizations);
    grid.clear();
    for (double t : tds)
      for (double u : uts) grid.push_back({t, u});
  }
  const auto rows = build_design_space(graphs, grid);
  auto out = open_out(a.out);
  write_features_csv(out, rows);
  std::printf("designs=%zu settings=%zu rows=%zu\n", graphs.size(), grid.size(), rows.size());
  return 0;
}

struct EvaluateArgs {
  fs::path features, out;
  std::string oracle = "synthetic";
  std::uint64_t seed = 0;
  double noise = 0.02;
};

int cmd_evaluate(const EvaluateArgs& a) {
  if (a.oracle != "synthetic") throw std::invalid_argument("evaluate supports --oracle synthetic");
  const auto space = read_features_csv(a.features);
  SyntheticOracle oracle(a.seed, a.noise);
  std::vector<EvalRecord> recs;
  for (const auto& d : space)
    recs.push_back({d.design_id, d.features.target_delay, d.features.utilization,
                    oracle.evaluate(d, CallClass::kInit), Source::kSynthetic});
  auto out = open_out(a.out);
  write_dataset_csv(out, recs);
  std::printf("evaluated=%zu\n", recs.size());
  return 0;
}

struct OracleArgs {
  std::string kind = "synthetic";
  fs::path dataset;
  std::uint64_t seed = 0;
  double noise = 0.02;

  std::unique_ptr<Oracle> make() const {
    if (kind == "synthetic") return std::make_unique<SyntheticOracle>(seed, noise);
    if (kind == "dataset") {
      if (dataset.empty()) throw std::invalid_argument("--oracle dataset needs --dataset");
      return std::make_unique<DatasetOracle>(ingest_csv(dataset));
    }
    throw std::invalid_argument("unknown oracle '" + kind + "'");
  }
};

struct PalArgs {
  fs::path features, out;
  OracleArgs oracle;
  std::string objectives = "delay,power";
  PalConfig cfg;
};

int cmd_pal(PalArgs& a) {
  const auto space = read_features_csv(a.features);
  const auto objs = parse_objectives(a.objectives);
  auto oracle = a.oracle.make();
  fs::create_directories(a.out);
  auto trace_out = open_out(a.out / "regions_trace.jsonl");
  auto sink = [&](const PalIterationTrace& t, const PalState& st) {
    json j{{"t", t.t}, {"pareto", t.pareto}, {"non_pareto", t.non_pareto},
           {"unclassified", t.unclassified}, {"max_diagonal", t.max_diagonal}};
    json picks = json::array();
    for (auto i : t.sampled) {
      const auto& d = space[i];
      picks.push_back({{"design_id", d.design_id},
                       {"target_delay", d.features.target_delay},
                       {"utilization", d.features.utilization},
                       {"lower", st.regions[i].lower},
                       {"upper", st.regions[i].upper}});
    }
    j["sampled"] = std::move(picks);
    trace_out << j.dump() << '\n';
  };
  const auto res = run_pal(space, *oracle, objs, a.cfg, sink);
  write_frontier(a.out / "frontier.csv", space, res.predicted, res.values_of(res.predicted),
                 res.frontier, objs);
  json c{{"method", "pal"}, {"objectives", join_objectives(objs)}};
  c.update(counts_json(res.counts));
  c["iterations"] = res.iterations;
  c["predicted"] = res.predicted.size();
  c["front"] = res.frontier.size();
  c["timeout_optimistic"] = res.timeout_optimistic;
  c["strict"] = a.cfg.strict;
  auto out = open_out(a.out / "counts.json");
  out << c.dump(2) << '\n';
  std::printf("iterations=%d predicted=%zu front=%zu init=%zu as=%zu veri=%zu\n", res.iterations,
              res.predicted.size(), res.frontier.size(), res.counts.init, res.counts.active_sample,
              res.counts.verify);
  return 0;
}

struct AlphaArgs {
  fs::path features, dataset, out;
  std::string oracle = "dataset";
  std::uint64_t oracle_seed = 0;
  double noise = 0.02;
  std::string objectives = "delay,power";
  std::string alphas;
  SweepConfig cfg;
};

int cmd_alpha(AlphaArgs& a) {
  const auto space = read_features_csv(a.features);
  const auto data = ingest_csv(a.dataset);
  const auto objs = parse_objectives(a.objectives);
  a.cfg.space = space_for(objs);
  if (!a.alphas.empty()) a.cfg.alphas = parse_list(a.alphas);
  std::unique_ptr<Oracle> oracle;
  if (a.oracle == "dataset") oracle = std::make_unique<DatasetOracle>(data);
  else if (a.oracle == "synthetic") oracle = std::make_unique<SyntheticOracle>(a.oracle_seed, a.noise);
  else throw std::invalid_argument("unknown oracle '" + a.oracle + "'");

  const auto res = sweep(data, space, a.cfg, *oracle);
  const auto sobjs = objectives_of(a.cfg.space);
  fs::create_directories(a.out);
  write_frontier(a.out / "frontier.csv", space, res.candidates, res.candidate_values, res.frontier,
                 sobjs);
  json c{{"method", "alpha_sweep"}, {"objectives", join_objectives(sobjs)},
         {"regressor", "kernel ridge (RBF), ridge by 5-fold CV"}};
  c.update(counts_json(res.counts));
  c["models"] = res.models_fitted;
  c["candidates"] = res.candidates.size();
  c["front"] = res.frontier.size();
  c["length_scale"] = res.length_scale;
  json mse = json::object();
  for (std::size_t k = 0; k < res.holdout_mse.size(); ++k)
    mse[std::string(to_string(sobjs[k]))] = res.holdout_mse[k];
  c["holdout_mse"] = mse;
  auto out = open_out(a.out / "counts.json");
  out << c.dump(2) << '\n';
  std::printf("models=%zu candidates=%zu front=%zu init=%zu veri=%zu\n", res.models_fitted,
              res.candidates.size(), res.frontier.size(), res.counts.init, res.counts.verify);
  return 0;
}

struct ReportArgs {
  std::vector<fs::path> runs;
  fs::path truth, out;
};

int cmd_report(const ReportArgs& a) {
  const auto truth = ingest_csv(a.truth);
  auto out = open_out(a.out);
  out << "run,method,objectives,eta,predicted,front,init,active_sample,verify,total\n";
  for (const auto& dir : a.runs) {
    std::ifstream cj(dir / "counts.json");
    if (!cj) throw std::runtime_error("missing " + (dir / "counts.json").string());
    const auto c = json::parse(cj);
    const auto objs = parse_objectives(c.at("objectives").get<std::string>());

    std::vector<Objectives> all;
    for (const auto& r : truth) all.push_back(project(r.ppa, objs));
    const auto ref = reference_point(all);
    std::vector<Objectives> true_front;
    for (auto i : front_indices(all)) true_front.push_back(all[i]);

    std::ifstream fin(dir / "frontier.csv");
    if (!fin) throw std::runtime_error("missing " + (dir / "frontier.csv").string());
    std::string line;
    csv::next_line(fin, line);
    const csv::Header h(line);
    std::vector<std::size_t> cols;
    for (auto o : objs) cols.push_back(h.at(to_string(o)));
    std::vector<Objectives> pred;
    std::size_t row = 1, front = 0;
    while (csv::next_line(fin, line)) {
      ++row;
      const auto f = csv::split(line);
      Objectives v;
      for (std::size_t k = 0; k < cols.size(); ++k) v.push_back(csv::to_real(f.at(cols[k]), row, to_string(objs[k])));
      pred.push_back(std::move(v));
      if (f.back() == "1") ++front;
    }
    const double eta = hv_error(true_front, pred, ref);
    out << dir.filename().string() << ',' << c.at("method").get<std::string>() << ",\""
        << join_objectives(objs) << "\"," << csv::format_real(eta) << ',' << pred.size() << ','
        << front << ',' << c.at("init").get<std::size_t>() << ','
        << c.at("active_sample").get<std::size_t>() << ',' << c.at("verify").get<std::size_t>()
        << ',' << c.at("total").get<std::size_t>() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prefix adder synthesis and PPA design space exploration"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Enumerate n-bit prefix graphs into a pool directory");
  g->add_option("--n", gen.cfg.bit_width, "Bit width")->default_val(64);
  g->add_option("--mfo", gen.cfg.mfo_limit, "Maximum fan-out limit")->default_val(64);
  g->add_option("--level-limit", gen.cfg.level_limit, "Level limit, 0 = ceil(log2 n)")->default_val(0);
  g->add_option("--bucket-cap", gen.cfg.size_bucket_capacity, "Graphs kept per (mfo, size) bucket")->default_val(1024);
  g->add_option("--size-slack", gen.cfg.size_slack, "Admissible size above the best per width")->default_val(8);
  g->add_option("--seed", gen.cfg.rng_seed, "Bucket truncation seed")->default_val(0);
  g->add_option("--threads", gen.cfg.threads, "Worker threads")->default_val(1);
  g->add_option("--memory-gb", gen.memory_gb, "Memory budget in GiB")->default_val(4.0);
  g->add_option("--widen", gen.widen, "Runs allowed, doubling the slack after a dead end")->default_val(3);
  g->add_flag("--strict-semi-regular", gen.cfg.strict_semi_regular, "Require every even-odd level-1 pair");
  g->add_flag("--no-semi-regular", gen.no_semi_regular, "Disable semi-regularity pruning");
  g->add_flag("--no-trivial-level-rule", gen.no_trivial_rule, "Disable the trivial fan-in level rule");
  g->add_flag("--global-depth", gen.global_depth, "Bound only the final depth, not every width");
  g->add_option("--sample", gen.sample, "Quasi-random sample size (0 = whole pool)")->default_val(0);
  g->add_option("--sample-seed", gen.sample_seed, "Sampling seed")->default_val(0);
  g->add_option("--out", gen.out, "Output pool directory")->required();

  FeaturesArgs fa;
  auto* f = app.add_subcommand("features", "Extract feature vectors for a pool");
  f->add_option("--pool", fa.pool, "Pool directory")->required();
  f->add_option("--grid", fa.grid, "Tool-setting grid")->default_val("default");
  f->add_option("--target-delays", fa.target_delays, "Override target delays (ns), comma separated");
  f->add_option("--utilizations", fa.utilizations, "Override utilizations, comma separated");
  f->add_option("--out", fa.out, "Features CSV")->required();

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Label feature rows with the oracle");
  e->add_option("--features", ev.features, "Features CSV")->required();
  e->add_option("--oracle", ev.oracle, "Oracle kind")->default_val("synthetic");
  e->add_option("--seed", ev.seed, "Oracle noise seed")->default_val(0);
  e->add_option("--noise", ev.noise, "Log-normal noise sigma")->default_val(0.02);
  e->add_option("--out", ev.out, "Dataset CSV")->required();

  auto* x = app.add_subcommand("explore", "Frontier exploration");
  x->require_subcommand(1);

  PalArgs pa;
  auto* p = x->add_subcommand("pal", "Pareto active learning");
  p->add_option("--features", pa.features, "Features CSV")->required();
  p->add_option("--oracle", pa.oracle.kind, "synthetic or dataset")->default_val("synthetic");
  p->add_option("--dataset", pa.oracle.dataset, "Measurements for --oracle dataset");
  p->add_option("--oracle-seed", pa.oracle.seed, "Synthetic oracle noise seed")->default_val(0);
  p->add_option("--noise", pa.oracle.noise, "Synthetic oracle noise sigma")->default_val(0.02);
  p->add_option("--objectives", pa.objectives, "Objectives, e.g. delay,power")->default_val("delay,power");
  p->add_option("--init", pa.cfg.init_size, "Initial random sample size")->default_val(250);
  p->add_option("--beta", pa.cfg.beta, "Confidence scaling")->default_val(16.0);
  p->add_option("--delta", pa.cfg.delta, "Classification tolerance")->default_val(0.001);
  p->add_option("--tmax", pa.cfg.t_max, "Maximum iterations")->default_val(20);
  p->add_option("--batch", pa.cfg.batch_size, "Samples per iteration")->default_val(1);
  p->add_option("--seed", pa.cfg.rng_seed, "Run seed")->default_val(0);
  p->add_flag("--strict", pa.cfg.strict, "Return P only at timeout");
  p->add_option("--out", pa.out, "Run directory")->required();

  AlphaArgs aa;
  auto* a = x->add_subcommand("alpha", "Scalarization sweep baseline");
  a->add_option("--features", aa.features, "Features CSV")->required();
  a->add_option("--dataset", aa.dataset, "Labeled training data")->required();
  a->add_option("--oracle", aa.oracle, "Verification oracle: dataset or synthetic")->default_val("dataset");
  a->add_option("--oracle-seed", aa.oracle_seed, "Synthetic oracle noise seed")->default_val(0);
  a->add_option("--noise", aa.noise, "Synthetic oracle noise sigma")->default_val(0.02);
  a->add_option("--objectives", aa.objectives, "Objectives, e.g. delay,power")->default_val("delay,power");
  a->add_option("--alphas", aa.alphas, "Comma separated weights (default: 15 standard values)");
  a->add_option("--topk", aa.cfg.top_k, "Designs kept per weight")->default_val(10);
  a->add_option("--training-size", aa.cfg.training_size, "Training sample size")->default_val(2500);
  a->add_option("--seed", aa.cfg.rng_seed, "Run seed")->default_val(0);
  a->add_option("--out", aa.out, "Run directory")->required();

  ReportArgs ra;
  auto* r = app.add_subcommand("report", "Hypervolume error and call counts per run");
  r->add_option("--runs", ra.runs, "Run directories")->required()->expected(1, -1);
  r->add_option("--truth", ra.truth, "Ground-truth dataset CSV")->required();
  r->add_option("--out", ra.out, "Report CSV")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*g) return cmd_generate(gen);
    if (*f) return cmd_features(fa);
    if (*e) return cmd_evaluate(ev);
    if (*p) return cmd_pal(pa);
    if (*a) return cmd_alpha(aa);
    if (*r) return cmd_report(ra);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  }
  return 0;
}
