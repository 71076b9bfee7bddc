#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "prefix_dse/features.hpp"
#include "prefix_dse/gp.hpp"
#include "prefix_dse/oracle.hpp"
#include "prefix_dse/pareto.hpp"

namespace prefix_dse {

/// Axis-aligned box in objective space; infinite bounds are allowed.
struct UncertaintyRegion {
  Objectives lower;
  Objectives upper;

  static UncertaintyRegion unbounded(std::size_t dims);
  /// Euclidean diagonal over the finite dimensions.
  double diagonal() const;
  bool contains(const UncertaintyRegion& inner) const;
};

UncertaintyRegion hyper_rectangle(std::span<const double> mean, std::span<const double> stddev,
                                  double beta);
/// Componentwise intersection. Where the boxes are disjoint the result
/// collapses onto the face of `a` nearest to `b`, so it always stays inside `a`.
UncertaintyRegion intersect(const UncertaintyRegion& a, const UncertaintyRegion& b);

enum class PalClass { kPareto, kNonPareto, kUnclassified };

struct PalConfig {
  double beta = 16.0;
  double delta = 0.001;
  int t_max = 20;
  std::size_t batch_size = 1;
  std::size_t init_size = 250;
  std::uint64_t rng_seed = 0;
  /// Strict mode returns P only; otherwise undecided designs whose
  /// pessimistic corner is non-dominated are added at timeout.
  bool strict = false;
  /// Boxes use the predictive spread of a new measurement (latent plus
  /// observation noise) rather than the latent spread alone.
  bool noisy_regions = true;
  GpFitOptions gp_initial{5, 100, 0, 1e-8, 128, true};  // first fit per objective
  GpFitOptions gp_refit{1, 25, 0, 1e-8, 128, true};  // later fits, warm-started
};

struct PalState {
  std::vector<PalClass> cls;
  std::vector<UncertaintyRegion> regions;
  std::vector<bool> sampled;
  int t = 0;

  explicit PalState(std::size_t designs = 0, std::size_t dims = 0);
  std::size_t count(PalClass c) const;
};

/// Moves designs out of U. Design x becomes N when some other non-N design's
/// pessimistic corner, worsened by delta, still dominates x's optimistic
/// corner; x becomes P when no other non-N design's optimistic corner,
/// worsened by delta, dominates x's pessimistic corner.
void classify(PalState& state, double delta);

/// Largest-diagonal designs in (U or P) minus sampled; ties by lower index.
/// An empty result means nothing is left to sample.
std::vector<std::size_t> select_samples(const PalState& state, std::size_t batch_size);

struct PalIterationTrace {
  int t = 0;
  std::size_t pareto = 0, non_pareto = 0, unclassified = 0;
  std::vector<std::size_t> sampled;
  double max_diagonal = 0.0;
};

struct PalResult {
  std::vector<std::size_t> predicted;  // indices into the design space (P-hat)
  std::vector<std::size_t> frontier;   // Pareto subset of P-hat by true values
  std::vector<std::size_t> labeled;    // every index with a true value, ascending
  std::vector<Objectives> labels;      // aligned with `labeled`
  CallCounts counts;
  int iterations = 0;
  bool timeout_optimistic = false;     // residual U was folded into P-hat
  PalState final_state;
  std::vector<GpHyperparams> hyperparams;  // last fit per objective

  /// True values of the given indices; each must be labeled.
  std::vector<Objectives> values_of(std::span<const std::size_t> ids) const;
};

using PalTraceSink = std::function<void(const PalIterationTrace&, const PalState&)>;

/// Pareto active learning over `space`, followed by a verification pass.
PalResult run_pal(const std::vector<DesignInstance>& space, Oracle& oracle,
                  std::span<const Objective> objectives, const PalConfig& cfg,
                  const PalTraceSink& trace = {});

}  // namespace prefix_dse
