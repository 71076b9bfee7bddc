#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prefix_dse {

using NodeId = std::uint32_t;

/// Raised when a graph violates one of the structural invariants.
class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// One node of a prefix network. Spans are inclusive bit ranges [msb:lsb].
struct PrefixNode {
  NodeId id = 0;
  int msb = 0;
  int lsb = 0;
  int level = 0;
  std::optional<NodeId> trivial_fanin;     // spans [msb:c]
  std::optional<NodeId> nontrivial_fanin;  // spans [c-1:lsb]

  bool is_input() const noexcept { return !trivial_fanin.has_value(); }
  bool operator==(const PrefixNode&) const = default;
};

struct GraphMetrics {
  int size = 0;   // non-input nodes
  int level = 0;  // max logic level
  int mfo = 0;    // max fan-out over prefix-graph edges
  bool operator==(const GraphMetrics&) const = default;
};

/// Sum of an n-bit addition; carry_out is bit n.
struct AddResult {
  std::uint64_t sum = 0;
  bool carry_out = false;
  bool operator==(const AddResult&) const = default;
};

/// Immutable, validated prefix network for an n-bit adder.
///
/// Nodes are stored in level-major topological order: inputs first (id k is
/// bit k), then prefix nodes sorted by (level, msb, lsb). Outputs map bit k to
/// the node spanning [k:0].
class PrefixGraph {
 public:
  /// Validates and canonicalizes. Ids in `nodes` may be arbitrary but must be
  /// dense; the stored graph is renumbered into canonical order.
  static PrefixGraph from_nodes(int bit_width, std::vector<PrefixNode> nodes,
                                std::vector<NodeId> outputs);

  int bit_width() const noexcept { return bit_width_; }
  std::span<const PrefixNode> nodes() const noexcept { return nodes_; }
  const PrefixNode& node(NodeId id) const { return nodes_.at(id); }
  std::span<const NodeId> outputs() const noexcept { return outputs_; }
  NodeId output(int bit) const { return outputs_.at(static_cast<std::size_t>(bit)); }
  std::size_t num_nodes() const noexcept { return nodes_.size(); }

  /// Fan-out per node, counting prefix-graph edges only.
  std::vector<int> fanouts() const;
  GraphMetrics metrics() const;

  /// Structural key: hash of the node-span set, independent of ids.
  std::uint64_t structural_hash() const;

  bool operator==(const PrefixGraph&) const = default;

 private:
  PrefixGraph() = default;
  int bit_width_ = 0;
  std::vector<PrefixNode> nodes_;
  std::vector<NodeId> outputs_;
};

/// Incremental construction; `build` assigns outputs and validates.
class PrefixGraphBuilder {
 public:
  explicit PrefixGraphBuilder(int bit_width);

  NodeId input(int bit) const;
  /// Adds trivial ∘ nontrivial; spans must concatenate.
  NodeId combine(NodeId trivial, NodeId nontrivial);
  std::optional<NodeId> find(int msb, int lsb) const;
  int level(NodeId id) const { return nodes_.at(id).level; }
  int bit_width() const noexcept { return bit_width_; }

  PrefixGraph build() const;

 private:
  int bit_width_;
  std::vector<PrefixNode> nodes_;
};

/// Checks every invariant; throws GraphError naming the first violation.
void validate(int bit_width, std::span<const PrefixNode> nodes,
              std::span<const NodeId> outputs);

/// Bitwise (g,p), prefix evaluation with the associative operator, then
/// sum post-processing. Requires bit_width <= 64.
AddResult simulate_add(const PrefixGraph& g, std::uint64_t a, std::uint64_t b);

/// Bit-sliced variant that evaluates many operand pairs per pass.
std::vector<AddResult> simulate_add_batch(const PrefixGraph& g,
                                          std::span<const std::uint64_t> a,
                                          std::span<const std::uint64_t> b);

/// (G,P) pair of every node for one operand pair, indexed by NodeId.
struct GroupSignal {
  bool generate = false;
  bool propagate = false;
  bool operator==(const GroupSignal&) const = default;
};
std::vector<GroupSignal> evaluate_nodes(const PrefixGraph& g, std::uint64_t a,
                                        std::uint64_t b);

enum class RegularKind { kKoggeStone, kSklansky, kBrentKung, kRipple };

RegularKind parse_regular_kind(std::string_view name);
std::string_view to_string(RegularKind kind);

/// Classical adders. Tree adders require a power-of-two width.
PrefixGraph make_regular(RegularKind kind, int bit_width);

std::string serialize(const PrefixGraph& g);
PrefixGraph parse(std::string_view text);

}  // namespace prefix_dse
