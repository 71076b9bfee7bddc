#include "prefix_dse/pgg.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "prefix_dse/hashing.hpp"

namespace prefix_dse {

int EnumConfig::effective_level_limit() const {
  if (level_limit > 0) return level_limit;
  return std::bit_width(static_cast<unsigned>(std::max(bit_width, 1)) - 1);
}

void EnumConfig::validate() const {
  if (bit_width < 1 || bit_width > 128)
    throw std::invalid_argument("enumeration bit width must be in [1, 128]");
  const int min_level = std::bit_width(static_cast<unsigned>(bit_width) - 1);
  if (effective_level_limit() < min_level)
    throw std::invalid_argument("level limit " + std::to_string(effective_level_limit()) +
                                " is below ceil(log2 n) = " + std::to_string(min_level));
  if (effective_level_limit() > 12) throw std::invalid_argument("level limit above 12 unsupported");
  if (mfo_limit < 2) throw std::invalid_argument("mfo limit must be at least 2");
  if (size_bucket_capacity < 1) throw std::invalid_argument("bucket capacity must be at least 1");
  if (size_slack < 0) throw std::invalid_argument("size slack must be non-negative");
  if (threads < 1) throw std::invalid_argument("thread count must be at least 1");
}

// ---------------------------------------------------------------------------
// SolutionPool

bool SolutionPool::insert(PrefixGraph g) {
  const auto m = g.metrics();
  const BucketKey key{m.mfo, m.size};
  const auto h = g.structural_hash();
  auto& keys = keys_[key];
  if (std::find(keys.begin(), keys.end(), h) != keys.end()) return false;
  keys.push_back(h);
  buckets_[key].push_back(std::move(g));
  ++count_;
  return true;
}

int SolutionPool::min_size() const {
  return min_size(std::numeric_limits<int>::max());
}

int SolutionPool::min_size(int mfo_at_most) const {
  int best = -1;
  for (const auto& [key, graphs] : buckets_)
    if (key.mfo <= mfo_at_most && !graphs.empty() && (best < 0 || key.size < best)) best = key.size;
  return best;
}

std::vector<PrefixGraph> SolutionPool::flatten() const {
  std::vector<PrefixGraph> out;
  out.reserve(count_);
  for (const auto& [key, graphs] : buckets_) out.insert(out.end(), graphs.begin(), graphs.end());
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

constexpr std::uint16_t kNone = 0xFFFF;
constexpr int kMaxChain = 12;

struct CompactNode {
  std::uint8_t msb = 0;
  std::uint8_t lsb = 0;
  std::uint8_t level = 0;
  std::uint8_t fanout = 0;
  std::uint16_t trivial = kNone;
  std::uint16_t nontrivial = kNone;
};

// Nodes are stored column by column; a column holds input i_m followed by
// the chain of nodes with msb m in decreasing-lsb order.
struct CompactGraph {
  std::vector<CompactNode> nodes;
  std::vector<std::uint16_t> col_begin;  // width + 1 entries
  std::uint64_t hash_sum = 0;
  int size = 0;
  int mfo = 0;

  int width() const { return static_cast<int>(col_begin.size()) - 1; }
  std::size_t bytes() const {
    return nodes.capacity() * sizeof(CompactNode) + col_begin.capacity() * 2 + sizeof(*this);
  }
};

struct Candidate {
  std::uint32_t parent = 0;
  std::uint8_t ntiles = 0;
  std::array<std::uint16_t, kMaxChain> tiles{};
  std::uint64_t hash_sum = 0;
  int size = 0;
  int mfo = 0;
};

std::uint64_t structural_key(int width, std::uint64_t hash_sum) {
  return hash_mix(static_cast<std::uint64_t>(width)) + hash_sum;
}

// Per-(mfo, size) buckets keeping the `capacity` smallest salted keys.
class BucketSet {
 public:
  BucketSet(int capacity, int slack) : capacity_(capacity), slack_(slack) {}

  int best_size() const { return best_; }

  void offer(std::uint64_t salted, const Candidate& c) {
    if (c.size > best_ + slack_) return;
    if (c.size < best_) best_ = c.size;
    auto& b = buckets_[BucketKey{c.mfo, c.size}];
    if (static_cast<int>(b.size()) >= capacity_ && salted >= b.rbegin()->first) return;
    if (!b.emplace(salted, c).second) return;
    if (static_cast<int>(b.size()) > capacity_) b.erase(std::prev(b.end()));
  }

  void merge(const BucketSet& other) {
    for (const auto& [key, b] : other.buckets_)
      for (const auto& [salted, c] : b) offer(salted, c);
  }

  std::size_t stored() const {
    std::size_t n = 0;
    for (const auto& [k, b] : buckets_)
      if (k.size <= best_ + slack_) n += b.size();
    return n;
  }

  template <class F>
  void for_each_kept(F&& f) const {
    for (const auto& [key, b] : buckets_) {
      if (key.size > best_ + slack_) continue;
      for (const auto& [salted, c] : b) f(c);
    }
  }

 private:
  int capacity_;
  int slack_;
  int best_ = 1 << 28;
  std::map<BucketKey, std::map<std::uint64_t, Candidate>> buckets_;
};

class Extender {
 public:
  Extender(const EnumConfig& cfg, int new_msb)
      : cfg_(cfg), msb_(new_msb), level_limit_(cfg.effective_level_limit()) {
    // The (msb+1)-bit graph must itself be minimum depth.
    if (cfg.per_width_depth)
      level_limit_ = std::min(level_limit_, static_cast<int>(std::bit_width(static_cast<unsigned>(new_msb))));
  }

  // Enumerates every admissible chain of new nodes with msb `msb_` that
  // tiles [msb_-1 : 0] with existing nodes, and offers each child to `out`.
  void extend(const CompactGraph& g, std::uint32_t parent_index, BucketSet& out,
              std::size_t& examined) {
    g_ = &g;
    out_ = &out;
    examined_ = &examined;
    cand_.parent = parent_index;
    dfs(msb_ - 1, 0, 0, 0, 0, msb_);
  }

 private:
  void dfs(int pos, int prev_level, int depth, int max_fo, std::uint64_t hash_acc, int split) {
    const auto& g = *g_;
    if (pos < 0) {
      ++*examined_;
      cand_.ntiles = static_cast<std::uint8_t>(depth);
      cand_.size = g.size + depth;
      cand_.mfo = std::max({g.mfo, max_fo, 1});
      cand_.hash_sum = g.hash_sum + hash_acc;
      const auto key = structural_key(msb_ + 1, cand_.hash_sum);
      out_->offer(hash_mix(key ^ cfg_.rng_seed), cand_);
      return;
    }
    if (depth >= kMaxChain) return;
    const int begin = g.col_begin[pos];
    const int end = g.col_begin[pos + 1];
    for (int idx = begin; idx < end; ++idx) {
      const auto& x = g.nodes[idx];
      const int fo = x.fanout + 1;
      if (fo > cfg_.mfo_limit) continue;
      if (cfg_.trivial_level_restriction && x.level < prev_level) continue;
      const int level = 1 + std::max(prev_level, static_cast<int>(x.level));
      if (level > level_limit_) continue;
      if (level == 1 && cfg_.semi_regular && (msb_ % 2) == 0) continue;
      if (depth == 0 && cfg_.strict_semi_regular && (msb_ % 2) == 1 && idx != begin) continue;
      // A node at the level limit can only be the final one of the chain.
      if (x.lsb > 0 && level >= level_limit_) continue;
      cand_.tiles[depth] = static_cast<std::uint16_t>(idx);
      dfs(x.lsb - 1, level, depth + 1, std::max(max_fo, fo),
          hash_acc + node_hash(msb_, x.lsb, split), x.lsb);
    }
  }

  const EnumConfig& cfg_;
  int msb_;
  int level_limit_;
  const CompactGraph* g_ = nullptr;
  BucketSet* out_ = nullptr;
  std::size_t* examined_ = nullptr;
  Candidate cand_;
};

CompactGraph materialize(const CompactGraph& parent, const Candidate& c) {
  CompactGraph g;
  g.nodes.reserve(parent.nodes.size() + 1 + c.ntiles);
  g.nodes = parent.nodes;
  g.col_begin = parent.col_begin;
  const int msb = parent.width();
  CompactNode in;
  in.msb = in.lsb = static_cast<std::uint8_t>(msb);
  g.nodes.push_back(in);
  auto prev = static_cast<std::uint16_t>(g.nodes.size() - 1);
  for (int j = 0; j < c.ntiles; ++j) {
    const auto t = c.tiles[j];
    CompactNode nd;
    nd.msb = static_cast<std::uint8_t>(msb);
    nd.lsb = g.nodes[t].lsb;
    nd.level = static_cast<std::uint8_t>(1 + std::max(g.nodes[prev].level, g.nodes[t].level));
    nd.trivial = prev;
    nd.nontrivial = t;
    ++g.nodes[prev].fanout;
    ++g.nodes[t].fanout;
    g.nodes.push_back(nd);
    prev = static_cast<std::uint16_t>(g.nodes.size() - 1);
  }
  g.col_begin.push_back(static_cast<std::uint16_t>(g.nodes.size()));
  g.hash_sum = c.hash_sum;
  g.size = c.size;
  g.mfo = c.mfo;
  return g;
}

PrefixGraph to_prefix_graph(const CompactGraph& cg) {
  const int n = cg.width();
  // Inputs take ids 0..n-1; prefix nodes follow in storage order.
  std::vector<NodeId> remap(cg.nodes.size());
  NodeId next = static_cast<NodeId>(n);
  for (std::size_t i = 0; i < cg.nodes.size(); ++i)
    remap[i] = cg.nodes[i].trivial == kNone ? static_cast<NodeId>(cg.nodes[i].msb) : next++;
  std::vector<PrefixNode> nodes(cg.nodes.size());
  for (std::size_t i = 0; i < cg.nodes.size(); ++i) {
    const auto& c = cg.nodes[i];
    PrefixNode nd;
    nd.id = remap[i];
    nd.msb = c.msb;
    nd.lsb = c.lsb;
    nd.level = c.level;
    if (c.trivial != kNone) {
      nd.trivial_fanin = remap[c.trivial];
      nd.nontrivial_fanin = remap[c.nontrivial];
    }
    nodes[nd.id] = nd;
  }
  std::vector<NodeId> outputs(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) outputs[m] = remap[cg.col_begin[m + 1] - 1u];
  return PrefixGraph::from_nodes(n, std::move(nodes), std::move(outputs));
}

}  // namespace

SolutionPool enumerate(const EnumConfig& cfg, EnumStats* stats) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  EnumStats local;

  std::vector<CompactGraph> gen(1);
  gen[0].nodes.push_back(CompactNode{});
  gen[0].col_begin = {0, 1};
  local.pool_per_width.push_back(1);
  local.min_size_per_width.push_back(0);
  local.bit_width_reached = 1;

  for (int msb = 1; msb < cfg.bit_width && !gen.empty(); ++msb) {
    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(gen.size())));
    std::vector<BucketSet> parts(workers, BucketSet(cfg.size_bucket_capacity, cfg.size_slack));
    std::vector<std::size_t> examined(workers, 0);
    auto work = [&](unsigned w) {
      Extender ext(cfg, msb);
      for (std::size_t i = w; i < gen.size(); i += workers)
        ext.extend(gen[i], static_cast<std::uint32_t>(i), parts[w], examined[w]);
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    for (unsigned w = 1; w < workers; ++w) parts[0].merge(parts[w]);
    for (auto e : examined) local.candidates_examined += e;

    const auto& kept = parts[0];
    const std::size_t next_count = kept.stored();
    const std::size_t node_bytes =
        (gen.empty() ? 0 : gen.front().bytes() + 16) * (gen.size() + next_count);
    if (node_bytes > cfg.memory_budget_bytes)
      throw EnumerationError(msb, "memory budget exceeded at bit width " + std::to_string(msb + 1) +
                                      " (" + std::to_string(next_count) + " graphs)");

    std::vector<CompactGraph> next;
    next.reserve(next_count);
    kept.for_each_kept([&](const Candidate& c) { next.push_back(materialize(gen[c.parent], c)); });
    gen = std::move(next);
    local.pool_per_width.push_back(gen.size());
    local.min_size_per_width.push_back(gen.empty() ? -1 : kept.best_size());
    if (!gen.empty()) local.bit_width_reached = msb + 1;
  }

  SolutionPool pool;
  if (local.bit_width_reached == cfg.bit_width)
    for (const auto& cg : gen) pool.insert(to_prefix_graph(cg));

  local.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (stats) *stats = std::move(local);
  return pool;
}

SolutionPool enumerate_widening(EnumConfig cfg, int max_attempts, EnumStats* stats) {
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
  std::vector<int> tried;
  double seconds = 0.0;
  for (int attempt = 0;; ++attempt) {
    EnumStats local;
    tried.push_back(cfg.size_slack);
    auto pool = enumerate(cfg, &local);
    seconds += local.seconds;
    if (!pool.empty() || attempt + 1 >= max_attempts) {
      local.slack_attempts = std::move(tried);
      local.seconds = seconds;
      if (stats) *stats = std::move(local);
      return pool;
    }
    cfg.size_slack = std::max(1, cfg.size_slack * 2);
  }
}

// ---------------------------------------------------------------------------
// Sampling

SampleResult quasi_random_sample(const SolutionPool& pool, std::size_t count,
                                 std::uint64_t rng_seed) {
  if (count < 1) throw std::invalid_argument("sample count must be at least 1");
  if (pool.empty()) throw std::invalid_argument("cannot sample from an empty pool");

  SampleResult result;
  if (count >= pool.size()) {
    result.graphs = pool.flatten();
    result.truncated = count > pool.size();
    return result;
  }

  struct SizeBin {
    const std::vector<PrefixGraph>* graphs;
    std::vector<std::size_t> remaining;
  };
  struct MfoBin {
    std::vector<SizeBin> sizes;  // ascending size
    std::size_t cursor = 0;
  };
  std::map<int, MfoBin> bins;
  for (const auto& [key, graphs] : pool.buckets()) {
    if (graphs.empty()) continue;
    SizeBin sb{&graphs, std::vector<std::size_t>(graphs.size())};
    for (std::size_t i = 0; i < graphs.size(); ++i) sb.remaining[i] = i;
    bins[key.mfo].sizes.push_back(std::move(sb));
  }

  std::mt19937_64 rng(rng_seed);
  auto pick_from = [&](MfoBin& mb) -> bool {
    for (std::size_t tries = 0; tries < mb.sizes.size(); ++tries) {
      auto& sb = mb.sizes[mb.cursor];
      mb.cursor = (mb.cursor + 1) % mb.sizes.size();
      if (sb.remaining.empty()) continue;
      std::uniform_int_distribution<std::size_t> d(0, sb.remaining.size() - 1);
      const auto j = d(rng);
      result.graphs.push_back((*sb.graphs)[sb.remaining[j]]);
      sb.remaining[j] = sb.remaining.back();
      sb.remaining.pop_back();
      return true;
    }
    return false;
  };

  while (result.graphs.size() < count) {
    bool any = false;
    for (auto& [mfo, mb] : bins) {
      if (result.graphs.size() >= count) break;
      any |= pick_from(mb);
    }
    if (!any) break;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Pool directory I/O

void write_pool(const std::filesystem::path& dir, const std::vector<PrefixGraph>& graphs) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / "index.csv");
  if (!index) throw std::runtime_error("cannot write " + (dir / "index.csv").string());
  index << "id,mfo,size\n";
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto m = graphs[i].metrics();
    index << i << ',' << m.mfo << ',' << m.size << '\n';
    std::ofstream f(dir / ("design_" + std::to_string(i) + ".pfx"));
    if (!f) throw std::runtime_error("cannot write graph file in " + dir.string());
    f << serialize(graphs[i]);
  }
}

std::vector<PrefixGraph> read_pool(const std::filesystem::path& dir) {
  std::ifstream index(dir / "index.csv");
  if (!index) throw std::runtime_error("missing pool index " + (dir / "index.csv").string());
  std::string line;
  std::getline(index, line);
  if (line.rfind("id,mfo,size", 0) != 0) throw std::runtime_error("bad pool index header");
  std::vector<PrefixGraph> out;
  while (std::getline(index, line)) {
    if (line.empty() || line == "\r") continue;
    const auto id = line.substr(0, line.find(','));
    std::ifstream f(dir / ("design_" + id + ".pfx"));
    if (!f) throw std::runtime_error("missing graph file for design " + id);
    std::stringstream ss;
    ss << f.rdbuf();
    out.push_back(parse(ss.str()));
  }
  return out;
}

}  // namespace prefix_dse
