#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "prefix_dse/alpha_sweep.hpp"
#include "prefix_dse/features.hpp"
#include "prefix_dse/gp.hpp"
#include "prefix_dse/oracle.hpp"
#include "prefix_dse/pal.hpp"
#include "prefix_dse/pareto.hpp"
#include "prefix_dse/pgg.hpp"
#include "prefix_dse/prefix_graph.hpp"

namespace py = pybind11;
using namespace prefix_dse;

namespace {

std::vector<Objective> objectives_arg(const std::string& names) { return parse_objectives(names); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Prefix adder synthesis and Pareto exploration";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<EnumerationError>(m, "EnumerationError", PyExc_RuntimeError);
  py::register_exception<UndefinedError>(m, "UndefinedError", PyExc_ValueError);
  py::register_exception<NumericalHealthError>(m, "NumericalHealthError", PyExc_ArithmeticError);

  // Prefix graphs
  py::class_<GraphMetrics>(m, "GraphMetrics")
      .def_readonly("size", &GraphMetrics::size)
      .def_readonly("level", &GraphMetrics::level)
      .def_readonly("mfo", &GraphMetrics::mfo)
      .def("__repr__", [](const GraphMetrics& g) {
        return "GraphMetrics(size=" + std::to_string(g.size) + ", level=" + std::to_string(g.level) +
               ", mfo=" + std::to_string(g.mfo) + ")";
      });

  py::class_<PrefixGraph>(m, "PrefixGraph")
      .def_property_readonly("bit_width", &PrefixGraph::bit_width)
      .def_property_readonly("num_nodes", &PrefixGraph::num_nodes)
      .def("metrics", &PrefixGraph::metrics)
      .def("fanouts", &PrefixGraph::fanouts)
      .def("structural_hash", &PrefixGraph::structural_hash)
      .def("spans", [](const PrefixGraph& g) {
        std::vector<std::pair<int, int>> out;
        for (const auto& nd : g.nodes()) out.emplace_back(nd.msb, nd.lsb);
        return out;
      })
      .def("outputs", [](const PrefixGraph& g) {
        return std::vector<NodeId>(g.outputs().begin(), g.outputs().end());
      })
      .def("__eq__", [](const PrefixGraph& a, const PrefixGraph& b) { return a == b; })
      .def("__str__", [](const PrefixGraph& g) { return serialize(g); });

  m.def("make_regular", [](const std::string& kind, int n) { return make_regular(parse_regular_kind(kind), n); },
        py::arg("kind"), py::arg("n"));
  m.def("serialize", &serialize);
  m.def("parse", [](const std::string& text) { return parse(text); });
  m.def("simulate_add", [](const PrefixGraph& g, std::uint64_t a, std::uint64_t b) {
    const auto r = simulate_add(g, a, b);
    return std::make_pair(r.sum, r.carry_out);
  });

  // Enumeration
  m.def(
      "enumerate",
      [](int n, int mfo, int bucket_cap, int size_slack, std::uint64_t seed, bool semi_regular,
         bool trivial_level_rule, unsigned threads, int widen) {
        EnumConfig cfg;
        cfg.bit_width = n;
        cfg.mfo_limit = mfo;
        cfg.size_bucket_capacity = bucket_cap;
        cfg.size_slack = size_slack;
        cfg.rng_seed = seed;
        cfg.semi_regular = semi_regular;
        cfg.trivial_level_restriction = trivial_level_rule;
        cfg.threads = threads;
        py::gil_scoped_release release;
        return enumerate_widening(cfg, widen).flatten();
      },
      py::arg("n"), py::arg("mfo"), py::arg("bucket_cap") = 1024, py::arg("size_slack") = 8, py::arg("seed") = 0,
      py::arg("semi_regular") = true, py::arg("trivial_level_rule") = true, py::arg("threads") = 1,
      py::arg("widen") = 3);
  m.def(
      "sample",
      [](const std::vector<PrefixGraph>& graphs, std::size_t count, std::uint64_t seed) {
        SolutionPool pool;
        for (const auto& g : graphs) pool.insert(g);
        return quasi_random_sample(pool, count, seed).graphs;
      },
      py::arg("graphs"), py::arg("count"), py::arg("seed") = 0);

  // Features
  py::class_<FeatureVector>(m, "FeatureVector")
      .def_readonly("size", &FeatureVector::size)
      .def_readonly("mfo", &FeatureVector::mfo)
      .def_readonly("target_delay", &FeatureVector::target_delay)
      .def_readonly("utilization", &FeatureVector::utilization)
      .def_readonly("spfo", &FeatureVector::spfo)
      .def("values", &FeatureVector::values);
  py::class_<DesignInstance>(m, "DesignInstance")
      .def_readonly("design_id", &DesignInstance::design_id)
      .def_readonly("features", &DesignInstance::features);
  m.def("spfo", &spfo, py::arg("graph"), py::arg("node"));
  m.def("spfo_all", &spfo_all);
  m.def("extract", &extract, py::arg("graph"), py::arg("target_delay"), py::arg("utilization"));
  m.def(
      "design_space",
      [](const std::vector<PrefixGraph>& graphs, const std::vector<std::pair<double, double>>& grid) {
        std::vector<ToolSetting> settings;
        if (grid.empty()) settings = default_grid();
        for (const auto& [td, u] : grid) settings.push_back({td, u});
        return build_design_space(graphs, settings);
      },
      py::arg("graphs"), py::arg("grid") = std::vector<std::pair<double, double>>{});

  // Oracle
  m.def(
      "evaluate_synthetic",
      [](const FeatureVector& fv, std::uint64_t seed, double noise) {
        const auto p = evaluate_synthetic(fv, seed, noise);
        return py::dict(py::arg("area") = p.area, py::arg("power") = p.power, py::arg("delay") = p.delay);
      },
      py::arg("features"), py::arg("seed") = 0, py::arg("noise") = 0.02);

  // Pareto
  m.def("front_indices", &front_indices);
  m.def("hypervolume", [](const std::vector<Objectives>& pts, const Objectives& ref) { return hypervolume(pts, ref); });
  m.def("hv_error", &hv_error, py::arg("true_front"), py::arg("approx"), py::arg("reference"));
  m.def("reference_point", &reference_point);

  // Gaussian process
  py::class_<GpHyperparams>(m, "GpHyperparams")
      .def(py::init<>())
      .def_readwrite("signal_variance", &GpHyperparams::signal_variance)
      .def_readwrite("length_scale", &GpHyperparams::length_scale)
      .def_readwrite("noise_variance", &GpHyperparams::noise_variance);
  py::class_<GpModel>(m, "GpModel")
      .def_static(
          "fit",
          [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool optimize, int restarts, std::uint64_t seed) {
            GpFitOptions o;
            o.optimize = optimize;
            o.restarts = restarts;
            o.seed = seed;
            return GpModel::fit(x, y, GpHyperparams{}, o);
          },
          py::arg("x"), py::arg("y"), py::arg("optimize") = true, py::arg("restarts") = 5, py::arg("seed") = 0)
      .def_property_readonly("hyperparams", &GpModel::hyperparams)
      .def_property_readonly("log_likelihood", &GpModel::log_likelihood)
      .def(
          "predict",
          [](const GpModel& g, const Eigen::MatrixXd& x, bool with_noise) {
            Eigen::VectorXd mean, sd;
            g.predict_batch(x, mean, sd, with_noise);
            return std::make_pair(mean, sd);
          },
          py::arg("x"), py::arg("with_noise") = false);

  // Exploration
  py::class_<CallCounts>(m, "CallCounts")
      .def_readonly("init", &CallCounts::init)
      .def_readonly("active_sample", &CallCounts::active_sample)
      .def_readonly("verify", &CallCounts::verify)
      .def("total", &CallCounts::total);
  py::class_<PalResult>(m, "PalResult")
      .def_readonly("predicted", &PalResult::predicted)
      .def_readonly("frontier", &PalResult::frontier)
      .def_readonly("labeled", &PalResult::labeled)
      .def_readonly("labels", &PalResult::labels)
      .def_readonly("counts", &PalResult::counts)
      .def_readonly("iterations", &PalResult::iterations)
      .def_readonly("timeout_optimistic", &PalResult::timeout_optimistic)
      .def("values_of", [](const PalResult& r, const std::vector<std::size_t>& ids) { return r.values_of(ids); });
  m.def(
      "run_pal",
      [](const std::vector<DesignInstance>& space, const std::string& objectives, std::size_t init, double beta,
         double delta, int t_max, std::size_t batch, std::uint64_t seed, bool strict, std::uint64_t oracle_seed,
         double noise) {
        PalConfig cfg;
        cfg.init_size = init;
        cfg.beta = beta;
        cfg.delta = delta;
        cfg.t_max = t_max;
        cfg.batch_size = batch;
        cfg.rng_seed = seed;
        cfg.strict = strict;
        SyntheticOracle oracle(oracle_seed, noise);
        py::gil_scoped_release release;
        return run_pal(space, oracle, objectives_arg(objectives), cfg);
      },
      py::arg("space"), py::arg("objectives") = "delay,power", py::arg("init") = 250, py::arg("beta") = 16.0,
      py::arg("delta") = 0.001, py::arg("t_max") = 20, py::arg("batch") = 1, py::arg("seed") = 0,
      py::arg("strict") = false, py::arg("oracle_seed") = 0, py::arg("noise") = 0.02);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("candidates", &SweepResult::candidates)
      .def_readonly("candidate_values", &SweepResult::candidate_values)
      .def_readonly("frontier", &SweepResult::frontier)
      .def_readonly("models_fitted", &SweepResult::models_fitted)
      .def_readonly("holdout_mse", &SweepResult::holdout_mse)
      .def_readonly("counts", &SweepResult::counts);
  m.def(
      "alpha_sweep",
      [](const std::vector<DesignInstance>& space, const std::string& objectives, std::size_t training_size,
         std::size_t top_k, std::uint64_t seed, std::uint64_t oracle_seed, double noise) {
        SyntheticOracle oracle(oracle_seed, noise);
        std::vector<EvalRecord> data;
        for (const auto& d : space)
          data.push_back({d.design_id, d.features.target_delay, d.features.utilization,
                          evaluate_synthetic(d.features, oracle_seed, noise), Source::kSynthetic});
        SweepConfig cfg;
        cfg.space = space_for(objectives_arg(objectives));
        cfg.training_size = training_size;
        cfg.top_k = top_k;
        cfg.rng_seed = seed;
        py::gil_scoped_release release;
        return sweep(data, space, cfg, oracle);
      },
      py::arg("space"), py::arg("objectives") = "delay,power", py::arg("training_size") = 2500,
      py::arg("top_k") = 10, py::arg("seed") = 0, py::arg("oracle_seed") = 0, py::arg("noise") = 0.02);
}
