#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prefix_dse/features.hpp"
#include "prefix_dse/pareto.hpp"

namespace prefix_dse {

struct PpaPoint {
  double area = 0.0;   // um^2
  double power = 0.0;  // mW
  double delay = 0.0;  // ns
  bool operator==(const PpaPoint&) const = default;
};

enum class Objective { kArea, kPower, kDelay };

std::string_view to_string(Objective o);
/// Comma-separated list such as "delay,power".
std::vector<Objective> parse_objectives(std::string_view list);
double get(const PpaPoint& p, Objective o);
Objectives project(const PpaPoint& p, std::span<const Objective> objectives);

enum class Source { kSynthetic, kIngested };

struct EvalRecord {
  std::size_t design_id = 0;
  double target_delay = 0.0;
  double utilization = 0.0;
  PpaPoint ppa;
  Source source = Source::kSynthetic;
};

/// (design_id, target delay, utilization) with settings rounded to 1e-9.
struct InstanceKey {
  std::size_t design_id = 0;
  std::int64_t target_delay = 0;
  std::int64_t utilization = 0;
  auto operator<=>(const InstanceKey&) const = default;
};
InstanceKey key_of(std::size_t design_id, double target_delay, double utilization);
InstanceKey key_of(const DesignInstance& d);

/// Coefficients of the synthetic cost model. Changing any value changes
/// every generated dataset, so bump `version` along with it.
struct SyntheticConstants {
  int version = 2;
  // delay
  double delay_base = 0.16;
  double delay_per_log2_mfo = 0.022;
  double delay_per_spfo = 0.0011;
  double delay_per_size = 0.00012;
  double recover_linear = 0.65;     // fraction of the gap a tight target recovers
  double recover_convex = 1.1;      // convex penalty as the target tightens
  double relax_slope = 0.15;        // slack absorbed when the target is loose
  // sizing effort grows with the squeezed gap
  double effort_linear = 3.0;
  double effort_quadratic = 9.0;
  // area
  double area_fixed = 180.0;
  double area_per_node = 9.5;
  double area_per_fanout = 0.35;
  // power
  double power_fixed = 0.04;
  double power_per_node = 0.0021;
  double power_per_spfo = 0.0001;
  double power_clock_exponent = 0.85;  // dynamic power vs target period
  double power_density = 0.08;         // extra wiring load at high utilization
};

/// Deterministic synthetic PPA for one design instance. `noise_sigma` is the
/// log-space standard deviation of independent multiplicative noise.
PpaPoint evaluate_synthetic(const FeatureVector& fv, std::uint64_t noise_seed,
                            double noise_sigma = 0.02,
                            const SyntheticConstants& k = SyntheticConstants{});

class IngestError : public std::runtime_error {
 public:
  IngestError(std::size_t row, const std::string& what)
      : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Header design_id,target_delay,utilization,area,power,delay.
std::vector<EvalRecord> ingest_csv(std::istream& in, Source source = Source::kIngested);
std::vector<EvalRecord> ingest_csv(const std::filesystem::path& path,
                                   Source source = Source::kIngested);
void write_dataset_csv(std::ostream& out, const std::vector<EvalRecord>& records);

enum class CallClass { kInit, kActiveSample, kVerify };

struct CallCounts {
  std::size_t init = 0;
  std::size_t active_sample = 0;
  std::size_t verify = 0;
  std::size_t total() const noexcept { return init + active_sample + verify; }
  bool operator==(const CallCounts&) const = default;
};

/// Evaluation backend with per-class call accounting.
class Oracle {
 public:
  virtual ~Oracle() = default;
  PpaPoint evaluate(const DesignInstance& d, CallClass cls);
  CallCounts counts() const noexcept;
  void reset_counts() noexcept;

 protected:
  virtual PpaPoint do_evaluate(const DesignInstance& d) = 0;

 private:
  std::array<std::atomic<std::size_t>, 3> counts_{};
};

class SyntheticOracle : public Oracle {
 public:
  explicit SyntheticOracle(std::uint64_t noise_seed, double noise_sigma = 0.02,
                           SyntheticConstants k = SyntheticConstants{})
      : seed_(noise_seed), sigma_(noise_sigma), k_(k) {}

 protected:
  PpaPoint do_evaluate(const DesignInstance& d) override;

 private:
  std::uint64_t seed_;
  double sigma_;
  SyntheticConstants k_;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Looks up measured values; unknown instances raise OracleError.
class DatasetOracle : public Oracle {
 public:
  explicit DatasetOracle(const std::vector<EvalRecord>& records);

 protected:
  PpaPoint do_evaluate(const DesignInstance& d) override;

 private:
  std::map<InstanceKey, PpaPoint> table_;
};

}  // namespace prefix_dse
