#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "prefix_dse/prefix_graph.hpp"

namespace prefix_dse {

/// Parameters of the bottom-up prefix graph enumeration.
struct EnumConfig {
  int bit_width = 64;
  int mfo_limit = 64;
  int level_limit = 0;  // 0 selects log2(bit_width)
  int size_bucket_capacity = 1024;
  int size_slack = 8;
  std::uint64_t rng_seed = 0;

  // Pruning rules. Disabling them is meant for ablations at small widths.
  bool semi_regular = true;
  bool strict_semi_regular = false;  // every even-odd level-1 pair must exist
  bool trivial_level_restriction = true;
  /// Every intermediate k-bit graph is itself minimum depth, so output bit k
  /// sits at level <= ceil(log2(k+1)). Off: only level_limit applies.
  bool per_width_depth = true;

  std::size_t memory_budget_bytes = std::size_t{4} << 30;
  unsigned threads = 1;

  int effective_level_limit() const;
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

class EnumerationError : public std::runtime_error {
 public:
  EnumerationError(int bit_width_reached, const std::string& what)
      : std::runtime_error(what), bit_width_reached_(bit_width_reached) {}
  int bit_width_reached() const noexcept { return bit_width_reached_; }

 private:
  int bit_width_reached_;
};

struct BucketKey {
  int mfo = 0;
  int size = 0;
  auto operator<=>(const BucketKey&) const = default;
};

/// Graphs binned by (mfo, size), deduplicated by structural hash.
class SolutionPool {
 public:
  /// Returns false if a graph with the same structure is already present.
  bool insert(PrefixGraph g);

  const std::map<BucketKey, std::vector<PrefixGraph>>& buckets() const noexcept { return buckets_; }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  /// Smallest stored size; -1 when empty.
  int min_size() const;
  int min_size(int mfo_at_most) const;
  /// All graphs in bucket order. Index in this list is the design id.
  std::vector<PrefixGraph> flatten() const;

 private:
  std::map<BucketKey, std::vector<PrefixGraph>> buckets_;
  std::map<BucketKey, std::vector<std::uint64_t>> keys_;
  std::size_t count_ = 0;
};

struct EnumStats {
  int bit_width_reached = 0;
  std::vector<std::size_t> pool_per_width;   // graphs kept at each width
  std::vector<int> min_size_per_width;
  std::size_t candidates_examined = 0;
  double seconds = 0.0;
  std::vector<int> slack_attempts;  // filled by enumerate_widening
};

SolutionPool enumerate(const EnumConfig& cfg, EnumStats* stats = nullptr);

/// Like enumerate, but when every partial graph dies out before reaching the
/// full width (tight mfo limits), retries with the size slack doubled, up to
/// `max_attempts` runs in total. Stats describe the last run.
SolutionPool enumerate_widening(EnumConfig cfg, int max_attempts, EnumStats* stats = nullptr);

struct SampleResult {
  std::vector<PrefixGraph> graphs;
  bool truncated = false;  // pool had fewer graphs than requested
};

/// Two-level (mfo, size) binned round-robin random selection.
SampleResult quasi_random_sample(const SolutionPool& pool, std::size_t count,
                                 std::uint64_t rng_seed);

/// One `design_<id>.pfx` per graph plus `index.csv` (id,mfo,size).
void write_pool(const std::filesystem::path& dir, const std::vector<PrefixGraph>& graphs);
/// Reads a pool directory in index order.
std::vector<PrefixGraph> read_pool(const std::filesystem::path& dir);

}  // namespace prefix_dse
