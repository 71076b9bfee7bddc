#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "prefix_dse/prefix_graph.hpp"

namespace prefix_dse {

/// Architectural plus tool-setting features of one design instance.
struct FeatureVector {
  int size = 0;
  int mfo = 0;
  double target_delay = 0.0;  // ns
  double utilization = 0.0;
  std::vector<std::int64_t> spfo;  // n/2 slots, see extract()

  /// Flattened numeric form: size, mfo, target_delay, utilization, spfo...
  std::vector<double> values() const;
  bool operator==(const FeatureVector&) const = default;
};

/// A point of the design space: architecture id plus its feature vector.
struct DesignInstance {
  std::size_t design_id = 0;
  FeatureVector features;
  bool operator==(const DesignInstance&) const = default;
};

struct ToolSetting {
  double target_delay = 0.0;
  double utilization = 0.0;
};

/// 4 target delays (0.1..0.4 ns) x 4 utilizations (0.5..0.8).
std::vector<ToolSetting> default_grid();

/// Sum-path-fan-out of every node, indexed by NodeId.
std::vector<std::int64_t> spfo_all(const PrefixGraph& g);
std::int64_t spfo(const PrefixGraph& g, NodeId node);

/// Slot j holds the spfo of output bit n - n/2 + j when that output sits at
/// level ceil(log2 n), and 0 otherwise.
FeatureVector extract(const PrefixGraph& g, double target_delay, double utilization);

/// Every graph crossed with every tool setting; design ids are graph indices.
std::vector<DesignInstance> build_design_space(const std::vector<PrefixGraph>& graphs,
                                               const std::vector<ToolSetting>& grid);

/// Columns: design_id,target_delay,utilization,size,mfo,spfo_0..spfo_{k-1}
void write_features_csv(std::ostream& out, const std::vector<DesignInstance>& rows);
std::vector<DesignInstance> read_features_csv(std::istream& in);
std::vector<DesignInstance> read_features_csv(const std::filesystem::path& path);

}  // namespace prefix_dse
