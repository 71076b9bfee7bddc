#include "prefix_dse/prefix_graph.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <map>
#include <numeric>
#include <sstream>

#include "prefix_dse/hashing.hpp"

namespace prefix_dse {

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string span_str(int msb, int lsb) {
  return "[" + std::to_string(msb) + ":" + std::to_string(lsb) + "]";
}

// Inputs first by bit, then prefix nodes by (level, msb, lsb, split).
bool canonical_less(const PrefixNode& x, const PrefixNode& y,
                    std::span<const PrefixNode> all) {
  if (x.is_input() != y.is_input()) return x.is_input();
  if (x.is_input()) return x.msb < y.msb;
  if (x.level != y.level) return x.level < y.level;
  if (x.msb != y.msb) return x.msb < y.msb;
  if (x.lsb != y.lsb) return x.lsb < y.lsb;
  return all[*x.trivial_fanin].lsb < all[*y.trivial_fanin].lsb;
}

}  // namespace

void validate(int bit_width, std::span<const PrefixNode> nodes,
              std::span<const NodeId> outputs) {
  if (bit_width < 1) throw GraphError("bit width must be positive");
  if (nodes.size() < static_cast<std::size_t>(bit_width))
    throw GraphError("graph has fewer nodes than input bits");
  const auto count = nodes.size();
  for (std::size_t i = 0; i < count; ++i) {
    const auto& nd = nodes[i];
    if (nd.id != i) throw GraphError("node ids must be dense: expected " + std::to_string(i));
    if (nd.trivial_fanin.has_value() != nd.nontrivial_fanin.has_value())
      throw GraphError("node " + std::to_string(i) + " has exactly one fan-in");
    if (nd.is_input()) {
      if (i >= static_cast<std::size_t>(bit_width) || nd.msb != static_cast<int>(i) ||
          nd.lsb != nd.msb)
        throw GraphError("input node " + std::to_string(i) + " must span [" +
                         std::to_string(i) + ":" + std::to_string(i) + "]");
      if (nd.level != 0) throw GraphError("input node " + std::to_string(i) + " must have level 0");
      continue;
    }
    if (i < static_cast<std::size_t>(bit_width))
      throw GraphError("ids 0.." + std::to_string(bit_width - 1) + " are reserved for inputs");
    const auto tr = *nd.trivial_fanin;
    const auto ntr = *nd.nontrivial_fanin;
    if (tr >= count || ntr >= count)
      throw GraphError("node " + std::to_string(i) + " references a missing fan-in");
    const auto& t = nodes[tr];
    const auto& u = nodes[ntr];
    if (nd.msb < nd.lsb || nd.lsb < 0 || nd.msb >= bit_width)
      throw GraphError("node " + std::to_string(i) + " has invalid span " + span_str(nd.msb, nd.lsb));
    if (t.msb != nd.msb)
      throw GraphError("trivial fan-in of node " + std::to_string(i) + " must share msb " +
                       std::to_string(nd.msb));
    if (u.lsb != nd.lsb)
      throw GraphError("non-trivial fan-in of node " + std::to_string(i) + " must share lsb " +
                       std::to_string(nd.lsb));
    if (t.lsb != u.msb + 1)
      throw GraphError("fan-in spans of node " + std::to_string(i) + " do not concatenate: " +
                       span_str(t.msb, t.lsb) + " and " + span_str(u.msb, u.lsb));
    if (nd.level != 1 + std::max(t.level, u.level))
      throw GraphError("node " + std::to_string(i) + " level must be 1 + max fan-in level");
  }
  if (outputs.size() != static_cast<std::size_t>(bit_width))
    throw GraphError("expected " + std::to_string(bit_width) + " outputs, got " +
                     std::to_string(outputs.size()));
  for (int k = 0; k < bit_width; ++k) {
    const auto id = outputs[static_cast<std::size_t>(k)];
    if (id >= count || nodes[id].msb != k || nodes[id].lsb != 0)
      throw GraphError("missing output node spanning " + span_str(k, 0) + " for bit " +
                       std::to_string(k));
  }
}

PrefixGraph PrefixGraph::from_nodes(int bit_width, std::vector<PrefixNode> nodes,
                                    std::vector<NodeId> outputs) {
  validate(bit_width, nodes, outputs);

  std::vector<NodeId> order(nodes.size());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(), [&](NodeId x, NodeId y) {
    return canonical_less(nodes[x], nodes[y], nodes);
  });
  std::vector<NodeId> remap(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) remap[order[i]] = static_cast<NodeId>(i);

  PrefixGraph g;
  g.bit_width_ = bit_width;
  g.nodes_.reserve(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    PrefixNode nd = nodes[order[i]];
    nd.id = static_cast<NodeId>(i);
    if (!nd.is_input()) {
      nd.trivial_fanin = remap[*nd.trivial_fanin];
      nd.nontrivial_fanin = remap[*nd.nontrivial_fanin];
    }
    g.nodes_.push_back(nd);
  }
  g.outputs_.reserve(outputs.size());
  for (auto o : outputs) g.outputs_.push_back(remap[o]);
  return g;
}

std::vector<int> PrefixGraph::fanouts() const {
  std::vector<int> fo(nodes_.size(), 0);
  for (const auto& nd : nodes_) {
    if (nd.is_input()) continue;
    ++fo[*nd.trivial_fanin];
    ++fo[*nd.nontrivial_fanin];
  }
  return fo;
}

GraphMetrics PrefixGraph::metrics() const {
  GraphMetrics m;
  m.size = static_cast<int>(nodes_.size()) - bit_width_;
  for (const auto& nd : nodes_) m.level = std::max(m.level, nd.level);
  const auto fo = fanouts();
  m.mfo = fo.empty() ? 0 : *std::max_element(fo.begin(), fo.end());
  return m;
}

std::uint64_t PrefixGraph::structural_hash() const {
  std::uint64_t h = hash_mix(static_cast<std::uint64_t>(bit_width_));
  for (const auto& nd : nodes_) {
    if (nd.is_input()) continue;
    h += node_hash(nd.msb, nd.lsb, nodes_[*nd.trivial_fanin].lsb);
  }
  return h;
}

PrefixGraphBuilder::PrefixGraphBuilder(int bit_width) : bit_width_(bit_width) {
  if (bit_width < 1) throw std::invalid_argument("bit width must be positive");
  for (int k = 0; k < bit_width; ++k) {
    PrefixNode nd;
    nd.id = static_cast<NodeId>(k);
    nd.msb = nd.lsb = k;
    nodes_.push_back(nd);
  }
}

NodeId PrefixGraphBuilder::input(int bit) const {
  if (bit < 0 || bit >= bit_width_) throw std::out_of_range("input bit out of range");
  return static_cast<NodeId>(bit);
}

NodeId PrefixGraphBuilder::combine(NodeId trivial, NodeId nontrivial) {
  const auto& t = nodes_.at(trivial);
  const auto& u = nodes_.at(nontrivial);
  if (t.lsb != u.msb + 1)
    throw GraphError("cannot combine " + span_str(t.msb, t.lsb) + " with " +
                     span_str(u.msb, u.lsb));
  PrefixNode nd;
  nd.id = static_cast<NodeId>(nodes_.size());
  nd.msb = t.msb;
  nd.lsb = u.lsb;
  nd.level = 1 + std::max(t.level, u.level);
  nd.trivial_fanin = trivial;
  nd.nontrivial_fanin = nontrivial;
  nodes_.push_back(nd);
  return nd.id;
}

std::optional<NodeId> PrefixGraphBuilder::find(int msb, int lsb) const {
  for (const auto& nd : nodes_)
    if (nd.msb == msb && nd.lsb == lsb) return nd.id;
  return std::nullopt;
}

PrefixGraph PrefixGraphBuilder::build() const {
  std::vector<NodeId> outputs(static_cast<std::size_t>(bit_width_), NodeId(-1));
  std::vector<int> best_level(static_cast<std::size_t>(bit_width_), 1 << 30);
  for (const auto& nd : nodes_) {
    if (nd.lsb != 0) continue;
    auto k = static_cast<std::size_t>(nd.msb);
    if (nd.level < best_level[k]) {
      best_level[k] = nd.level;
      outputs[k] = nd.id;
    }
  }
  return PrefixGraph::from_nodes(bit_width_, nodes_, std::move(outputs));
}

std::vector<GroupSignal> evaluate_nodes(const PrefixGraph& g, std::uint64_t a,
                                        std::uint64_t b) {
  std::vector<GroupSignal> gp(g.num_nodes());
  for (const auto& nd : g.nodes()) {
    if (nd.is_input()) {
      const bool ai = (a >> nd.msb) & 1U;
      const bool bi = (b >> nd.msb) & 1U;
      gp[nd.id] = {ai && bi, ai != bi};
    } else {
      const auto& hi = gp[*nd.trivial_fanin];
      const auto& lo = gp[*nd.nontrivial_fanin];
      gp[nd.id] = {hi.generate || (hi.propagate && lo.generate), hi.propagate && lo.propagate};
    }
  }
  return gp;
}

AddResult simulate_add(const PrefixGraph& g, std::uint64_t a, std::uint64_t b) {
  const int n = g.bit_width();
  if (n > 64) throw std::invalid_argument("simulation supports at most 64 bits");
  const auto gp = evaluate_nodes(g, a, b);
  AddResult r;
  bool carry = false;
  for (int k = 0; k < n; ++k) {
    const bool p = gp[static_cast<std::size_t>(k)].propagate;
    if (p != carry) r.sum |= std::uint64_t{1} << k;
    carry = gp[g.output(k)].generate;
  }
  r.carry_out = carry;
  return r;
}

namespace {

// In-place transpose of a 64x64 bit matrix: bit j of row k <-> bit k of row j.
void transpose64(std::array<std::uint64_t, 64>& m) {
  std::uint64_t mask = 0x00000000FFFFFFFFULL;
  for (int w = 32; w > 0; w >>= 1, mask ^= mask << w) {
    for (int k = 0; k < 64; k = ((k | w) + 1) & ~w) {
      const std::uint64_t t = ((m[k] >> w) ^ m[k | w]) & mask;
      m[k] ^= t << w;
      m[k | w] ^= t;
    }
  }
}

}  // namespace

std::vector<AddResult> simulate_add_batch(const PrefixGraph& g,
                                          std::span<const std::uint64_t> a,
                                          std::span<const std::uint64_t> b) {
  const int n = g.bit_width();
  if (n > 64) throw std::invalid_argument("simulation supports at most 64 bits");
  if (a.size() != b.size()) throw std::invalid_argument("operand batches differ in length");
  const std::uint64_t mask = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);

  std::vector<AddResult> out(a.size());
  std::vector<std::uint64_t> gen(g.num_nodes()), prop(g.num_nodes());
  std::array<std::uint64_t, 64> pa{}, pb{};

  for (std::size_t base = 0; base < a.size(); base += 64) {
    const std::size_t lanes = std::min<std::size_t>(64, a.size() - base);
    // Transpose operands into bit planes: plane[k] lane j = bit k of operand j.
    pa.fill(0);
    pb.fill(0);
    for (std::size_t j = 0; j < lanes; ++j) {
      pa[j] = a[base + j] & mask;
      pb[j] = b[base + j] & mask;
    }
    transpose64(pa);
    transpose64(pb);
    for (const auto& nd : g.nodes()) {
      if (nd.is_input()) {
        gen[nd.id] = pa[nd.msb] & pb[nd.msb];
        prop[nd.id] = pa[nd.msb] ^ pb[nd.msb];
      } else {
        const auto t = *nd.trivial_fanin;
        const auto u = *nd.nontrivial_fanin;
        gen[nd.id] = gen[t] | (prop[t] & gen[u]);
        prop[nd.id] = prop[t] & prop[u];
      }
    }
    std::uint64_t carry_in = 0;
    std::array<std::uint64_t, 64> sum_plane{};
    for (int k = 0; k < n; ++k) {
      sum_plane[k] = prop[static_cast<std::size_t>(k)] ^ carry_in;
      carry_in = gen[g.output(k)];
    }
    transpose64(sum_plane);
    for (std::size_t j = 0; j < lanes; ++j) out[base + j] = {sum_plane[j] & mask, ((carry_in >> j) & 1U) != 0};
  }
  return out;
}

RegularKind parse_regular_kind(std::string_view name) {
  if (name == "kogge_stone") return RegularKind::kKoggeStone;
  if (name == "sklansky") return RegularKind::kSklansky;
  if (name == "brent_kung") return RegularKind::kBrentKung;
  if (name == "ripple") return RegularKind::kRipple;
  throw std::invalid_argument("unknown adder kind '" + std::string(name) + "'");
}

std::string_view to_string(RegularKind kind) {
  switch (kind) {
    case RegularKind::kKoggeStone: return "kogge_stone";
    case RegularKind::kSklansky: return "sklansky";
    case RegularKind::kBrentKung: return "brent_kung";
    case RegularKind::kRipple: return "ripple";
  }
  return "unknown";
}

PrefixGraph make_regular(RegularKind kind, int n) {
  if (n < 2) throw std::invalid_argument("regular adders need at least 2 bits");
  const bool pow2 = std::has_single_bit(static_cast<unsigned>(n));
  if (kind != RegularKind::kRipple && !pow2)
    throw std::invalid_argument(std::string(to_string(kind)) + " requires a power-of-two width, got " +
                                std::to_string(n));
  const int log_n = std::bit_width(static_cast<unsigned>(n)) - 1;

  PrefixGraphBuilder b(n);
  // top[k]: most recent node in column k.
  std::vector<NodeId> top(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) top[k] = b.input(k);

  switch (kind) {
    case RegularKind::kRipple:
      for (int k = 1; k < n; ++k) top[k] = b.combine(top[k], top[k - 1]);
      break;
    case RegularKind::kKoggeStone:
      for (int l = 1; l <= log_n; ++l) {
        const int dist = 1 << (l - 1);
        auto prev = top;
        for (int k = dist; k < n; ++k) top[k] = b.combine(prev[k], prev[k - dist]);
      }
      break;
    case RegularKind::kSklansky:
      for (int l = 1; l <= log_n; ++l) {
        const int half = 1 << (l - 1);
        for (int k = 0; k < n; ++k) {
          if (((k >> (l - 1)) & 1) == 0) continue;
          const int block_lsb = (k >> l) << l;
          const int mid = block_lsb + half;
          top[k] = b.combine(top[k], *b.find(mid - 1, block_lsb));
        }
      }
      break;
    case RegularKind::kBrentKung:
      for (int l = 1; l <= log_n; ++l) {
        const int stride = 1 << l;
        for (int k = stride - 1; k < n; k += stride) top[k] = b.combine(top[k], top[k - stride / 2]);
      }
      for (int l = log_n - 1; l >= 1; --l) {
        const int stride = 1 << l;
        const int half = stride / 2;
        for (int k = stride + half - 1; k < n; k += stride) top[k] = b.combine(top[k], top[k - half]);
      }
      break;
  }
  return b.build();
}

std::string serialize(const PrefixGraph& g) {
  std::ostringstream os;
  os << "pfx " << g.bit_width() << '\n';
  for (const auto& nd : g.nodes()) {
    if (nd.is_input()) continue;
    os << nd.id << ' ' << nd.msb << ' ' << nd.lsb << ' ' << nd.level << ' ' << *nd.trivial_fanin
       << ' ' << *nd.nontrivial_fanin << '\n';
  }
  os << "outputs";
  for (auto o : g.outputs()) os << ' ' << o;
  os << '\n';
  return os.str();
}

namespace {

std::vector<long long> parse_ints(std::string_view s, int line) {
  std::vector<long long> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    if (i >= s.size()) break;
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
    if (ec != std::errc() || (ptr != s.data() + s.size() && *ptr != ' ' && *ptr != '\t' && *ptr != '\r'))
      throw ParseError(line, "expected integer near '" + std::string(s.substr(i, 16)) + "'");
    out.push_back(v);
    i = static_cast<std::size_t>(ptr - s.data());
  }
  return out;
}

std::string_view strip(std::string_view s) {
  if (auto pos = s.find('#'); pos != std::string_view::npos) s = s.substr(0, pos);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

PrefixGraph parse(std::string_view text) {
  int line_no = 0;
  int width = -1;
  std::vector<PrefixNode> nodes;
  std::vector<NodeId> outputs;
  bool have_outputs = false;
  int outputs_line = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = strip(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;

    if (width < 0) {
      if (!line.starts_with("pfx"))
        throw ParseError(line_no, "expected header 'pfx <n>'");
      auto v = parse_ints(line.substr(3), line_no);
      if (v.size() != 1 || v[0] < 1 || v[0] > 4096) throw ParseError(line_no, "invalid bit width");
      width = static_cast<int>(v[0]);
      for (int k = 0; k < width; ++k) {
        PrefixNode nd;
        nd.id = static_cast<NodeId>(k);
        nd.msb = nd.lsb = k;
        nodes.push_back(nd);
      }
      continue;
    }
    if (have_outputs) throw ParseError(line_no, "content after outputs line");
    if (line.starts_with("outputs")) {
      auto v = parse_ints(line.substr(7), line_no);
      for (auto x : v) {
        if (x < 0 || static_cast<std::size_t>(x) >= nodes.size())
          throw ParseError(line_no, "output references unknown node " + std::to_string(x));
        outputs.push_back(static_cast<NodeId>(x));
      }
      have_outputs = true;
      outputs_line = line_no;
      continue;
    }
    auto v = parse_ints(line, line_no);
    if (v.size() != 6) throw ParseError(line_no, "node line needs 6 fields");
    const auto id = v[0];
    if (id != static_cast<long long>(nodes.size()))
      throw ParseError(line_no, "node id " + std::to_string(id) + " out of sequence, expected " +
                                    std::to_string(nodes.size()));
    for (int f : {4, 5})
      if (v[f] < 0 || v[f] >= id)
        throw ParseError(line_no, "fan-in " + std::to_string(v[f]) + " must be declared earlier");
    PrefixNode nd;
    nd.id = static_cast<NodeId>(id);
    nd.msb = static_cast<int>(v[1]);
    nd.lsb = static_cast<int>(v[2]);
    nd.level = static_cast<int>(v[3]);
    nd.trivial_fanin = static_cast<NodeId>(v[4]);
    nd.nontrivial_fanin = static_cast<NodeId>(v[5]);
    const auto& t = nodes[*nd.trivial_fanin];
    const auto& u = nodes[*nd.nontrivial_fanin];
    if (t.msb != nd.msb || u.lsb != nd.lsb || t.lsb != u.msb + 1)
      throw ParseError(line_no, "fan-in spans do not compose " + span_str(nd.msb, nd.lsb));
    if (nd.level != 1 + std::max(t.level, u.level))
      throw ParseError(line_no, "level must be 1 + max fan-in level");
    if (nd.msb >= width) throw ParseError(line_no, "msb exceeds bit width");
    nodes.push_back(nd);
  }
  if (width < 0) throw ParseError(line_no, "empty graph file");
  if (!have_outputs) throw ParseError(line_no, "missing outputs line");
  try {
    return PrefixGraph::from_nodes(width, std::move(nodes), std::move(outputs));
  } catch (const GraphError& e) {
    throw ParseError(outputs_line, e.what());
  }
}

}  // namespace prefix_dse
