#include "prefix_dse/oracle.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>

#include "prefix_dse/csv.hpp"
#include "prefix_dse/hashing.hpp"

namespace prefix_dse {

std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::kArea: return "area";
    case Objective::kPower: return "power";
    case Objective::kDelay: return "delay";
  }
  return "?";
}

std::vector<Objective> parse_objectives(std::string_view list) {
  std::vector<Objective> out;
  for (const auto& name : csv::split(list)) {
    Objective o;
    if (name == "area") o = Objective::kArea;
    else if (name == "power") o = Objective::kPower;
    else if (name == "delay") o = Objective::kDelay;
    else throw std::invalid_argument("unknown objective '" + name + "'");
    for (auto prev : out)
      if (prev == o) throw std::invalid_argument("objective '" + name + "' listed twice");
    out.push_back(o);
  }
  if (out.size() < 2) throw std::invalid_argument("need at least two objectives");
  return out;
}

double get(const PpaPoint& p, Objective o) {
  switch (o) {
    case Objective::kArea: return p.area;
    case Objective::kPower: return p.power;
    case Objective::kDelay: return p.delay;
  }
  return 0.0;
}

Objectives project(const PpaPoint& p, std::span<const Objective> objectives) {
  Objectives v;
  v.reserve(objectives.size());
  for (auto o : objectives) v.push_back(get(p, o));
  return v;
}

InstanceKey key_of(std::size_t design_id, double target_delay, double utilization) {
  return {design_id, std::llround(target_delay * 1e9), std::llround(utilization * 1e9)};
}

InstanceKey key_of(const DesignInstance& d) {
  return key_of(d.design_id, d.features.target_delay, d.features.utilization);
}

// ---------------------------------------------------------------------------
// Synthetic model

namespace {

double unit_open(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller on counter-based uniforms, so draws depend only on the key.
double gaussian(std::uint64_t key, std::uint64_t stream) {
  const double u1 = unit_open(hash_mix(key + 2 * stream));
  const double u2 = unit_open(hash_mix(key + 2 * stream + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

PpaPoint evaluate_synthetic(const FeatureVector& fv, std::uint64_t noise_seed, double noise_sigma,
                            const SyntheticConstants& k) {
  double spfo_mean = 0.0;
  for (auto s : fv.spfo) spfo_mean += static_cast<double>(s);
  if (!fv.spfo.empty()) spfo_mean /= static_cast<double>(fv.spfo.size());
  const double size = fv.size;
  const double td = fv.target_delay;

  const double intrinsic = k.delay_base + k.delay_per_log2_mfo * std::log2(std::max(fv.mfo, 1)) +
                           k.delay_per_spfo * spfo_mean + k.delay_per_size * size;
  const double gap = intrinsic - td;
  double delay = 0.0;
  double effort = 1.0;
  if (gap > 0.0) {
    delay = intrinsic - k.recover_linear * gap + k.recover_convex * gap * gap;
    effort = 1.0 + k.effort_linear * gap + k.effort_quadratic * gap * gap;
  } else {
    delay = intrinsic - k.relax_slope * gap;
    effort = 1.0 / (1.0 - 1.5 * gap);
  }

  PpaPoint p;
  p.area = (k.area_fixed + effort * (k.area_per_node * size + k.area_per_fanout * spfo_mean)) /
           fv.utilization;
  // Sizing effort shows up in area only; power tracks node count and wiring.
  p.power = (k.power_fixed + k.power_per_node * size + k.power_per_spfo * spfo_mean) *
            std::pow(0.25 / td, k.power_clock_exponent) * (1.0 + k.power_density * fv.utilization);
  p.delay = delay;

  if (noise_sigma > 0.0) {
    std::uint64_t h = hash_mix(noise_seed ^ 0x6f7261636c65ULL);
    for (double v : fv.values()) h = hash_mix(h ^ std::bit_cast<std::uint64_t>(v));
    p.area *= std::exp(noise_sigma * gaussian(h, 0));
    p.power *= std::exp(noise_sigma * gaussian(h, 1));
    p.delay *= std::exp(noise_sigma * gaussian(h, 2));
  }
  return p;
}

// ---------------------------------------------------------------------------
// CSV datasets

std::vector<EvalRecord> ingest_csv(std::istream& in, Source source) {
  std::string line;
  if (!csv::next_line(in, line)) throw IngestError(1, "empty dataset");
  std::vector<std::size_t> col;
  try {
    const csv::Header header(line);
    for (auto name : {"design_id", "target_delay", "utilization", "area", "power", "delay"})
      col.push_back(header.at(name));
  } catch (const csv::CsvError& e) {
    throw IngestError(1, e.what());
  }
  const std::size_t width = csv::split(line).size();

  std::vector<EvalRecord> out;
  std::set<InstanceKey> seen;
  std::size_t row = 1;
  while (csv::next_line(in, line)) {
    ++row;
    const auto f = csv::split(line);
    if (f.size() != width)
      throw IngestError(row, "expected " + std::to_string(width) + " fields, got " +
                                 std::to_string(f.size()));
    EvalRecord r;
    r.source = source;
    try {
      const auto id = csv::to_int(f[col[0]], row, "design_id");
      if (id < 0) throw IngestError(row, "negative design_id");
      r.design_id = static_cast<std::size_t>(id);
      r.target_delay = csv::to_real(f[col[1]], row, "target_delay");
      r.utilization = csv::to_real(f[col[2]], row, "utilization");
      r.ppa.area = csv::to_real(f[col[3]], row, "area");
      r.ppa.power = csv::to_real(f[col[4]], row, "power");
      r.ppa.delay = csv::to_real(f[col[5]], row, "delay");
    } catch (const csv::CsvError& e) {
      throw IngestError(row, e.what());
    }
    if (!(r.target_delay > 0.0)) throw IngestError(row, "target_delay must be positive");
    if (!(r.utilization > 0.0 && r.utilization <= 1.0))
      throw IngestError(row, "utilization must be in (0, 1]");
    if (!(r.ppa.area > 0.0)) throw IngestError(row, "area must be positive");
    if (!(r.ppa.power > 0.0)) throw IngestError(row, "power must be positive");
    if (!(r.ppa.delay > 0.0)) throw IngestError(row, "delay must be positive");
    if (!seen.insert(key_of(r.design_id, r.target_delay, r.utilization)).second)
      throw IngestError(row, "duplicate (design_id, target_delay, utilization)");
    out.push_back(r);
  }
  return out;
}

std::vector<EvalRecord> ingest_csv(const std::filesystem::path& path, Source source) {
  std::ifstream in(path);
  if (!in) throw IngestError(0, "cannot open " + path.string());
  return ingest_csv(in, source);
}

void write_dataset_csv(std::ostream& out, const std::vector<EvalRecord>& records) {
  out << "design_id,target_delay,utilization,area,power,delay\n";
  for (const auto& r : records)
    out << r.design_id << ',' << csv::format_real(r.target_delay) << ','
        << csv::format_real(r.utilization) << ',' << csv::format_real(r.ppa.area) << ','
        << csv::format_real(r.ppa.power) << ',' << csv::format_real(r.ppa.delay) << '\n';
}

// ---------------------------------------------------------------------------
// Oracles

PpaPoint Oracle::evaluate(const DesignInstance& d, CallClass cls) {
  auto p = do_evaluate(d);
  counts_[static_cast<std::size_t>(cls)].fetch_add(1, std::memory_order_relaxed);
  return p;
}

CallCounts Oracle::counts() const noexcept {
  return {counts_[0].load(), counts_[1].load(), counts_[2].load()};
}

void Oracle::reset_counts() noexcept {
  for (auto& c : counts_) c.store(0);
}

PpaPoint SyntheticOracle::do_evaluate(const DesignInstance& d) {
  return evaluate_synthetic(d.features, seed_, sigma_, k_);
}

DatasetOracle::DatasetOracle(const std::vector<EvalRecord>& records) {
  for (const auto& r : records)
    if (!table_.emplace(key_of(r.design_id, r.target_delay, r.utilization), r.ppa).second)
      throw OracleError("duplicate record for design " + std::to_string(r.design_id));
}

PpaPoint DatasetOracle::do_evaluate(const DesignInstance& d) {
  const auto it = table_.find(key_of(d));
  if (it == table_.end())
    throw OracleError("no measurement for design " + std::to_string(d.design_id) +
                      " at target_delay " + csv::format_real(d.features.target_delay) +
                      ", utilization " + csv::format_real(d.features.utilization));
  return it->second;
}

}  // namespace prefix_dse
