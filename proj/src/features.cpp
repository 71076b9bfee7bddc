#include "prefix_dse/features.hpp"

#include <bit>
#include <fstream>
#include <ostream>
#include <string>

#include "prefix_dse/csv.hpp"

namespace prefix_dse {

std::vector<double> FeatureVector::values() const {
  std::vector<double> v;
  v.reserve(4 + spfo.size());
  v.push_back(size);
  v.push_back(mfo);
  v.push_back(target_delay);
  v.push_back(utilization);
  for (auto s : spfo) v.push_back(static_cast<double>(s));
  return v;
}

std::vector<ToolSetting> default_grid() {
  std::vector<ToolSetting> grid;
  for (int d = 1; d <= 4; ++d)
    for (int u = 5; u <= 8; ++u) grid.push_back({d / 10.0, u / 10.0});
  return grid;
}

std::vector<std::int64_t> spfo_all(const PrefixGraph& g) {
  const auto fo = g.fanouts();
  std::vector<std::int64_t> s(g.num_nodes(), 0);
  // Storage order is topological, so fan-ins are final when visited.
  for (const auto& nd : g.nodes()) {
    if (nd.is_input()) continue;
    const auto a = *nd.trivial_fanin;
    const auto b = *nd.nontrivial_fanin;
    s[nd.id] = fo[a] + s[a] + fo[b] + s[b];
  }
  return s;
}

std::int64_t spfo(const PrefixGraph& g, NodeId node) {
  if (node >= g.num_nodes()) throw std::out_of_range("spfo: node id out of range");
  return spfo_all(g)[node];
}

FeatureVector extract(const PrefixGraph& g, double target_delay, double utilization) {
  const int n = g.bit_width();
  const auto m = g.metrics();
  const int top_level = std::bit_width(static_cast<unsigned>(n) - 1);
  const auto s = spfo_all(g);

  FeatureVector fv;
  fv.size = m.size;
  fv.mfo = m.mfo;
  fv.target_delay = target_delay;
  fv.utilization = utilization;
  const int slots = n / 2;
  fv.spfo.assign(static_cast<std::size_t>(slots), 0);
  for (int j = 0; j < slots; ++j) {
    const auto out = g.output(n - slots + j);
    if (g.node(out).level == top_level) fv.spfo[j] = s[out];
  }
  return fv;
}

std::vector<DesignInstance> build_design_space(const std::vector<PrefixGraph>& graphs,
                                               const std::vector<ToolSetting>& grid) {
  std::vector<DesignInstance> out;
  out.reserve(graphs.size() * grid.size());
  for (std::size_t i = 0; i < graphs.size(); ++i)
    for (const auto& t : grid) out.push_back({i, extract(graphs[i], t.target_delay, t.utilization)});
  return out;
}

void write_features_csv(std::ostream& out, const std::vector<DesignInstance>& rows) {
  const std::size_t slots = rows.empty() ? 0 : rows.front().features.spfo.size();
  out << "design_id,target_delay,utilization,size,mfo";
  for (std::size_t j = 0; j < slots; ++j) out << ",spfo_" << j;
  out << '\n';
  for (const auto& r : rows) {
    if (r.features.spfo.size() != slots)
      throw std::invalid_argument("feature rows have differing spfo lengths");
    const auto& f = r.features;
    out << r.design_id << ',' << csv::format_real(f.target_delay) << ','
        << csv::format_real(f.utilization) << ',' << f.size << ',' << f.mfo;
    for (auto s : f.spfo) out << ',' << s;
    out << '\n';
  }
}

std::vector<DesignInstance> read_features_csv(std::istream& in) {
  std::string line;
  if (!csv::next_line(in, line)) throw csv::CsvError(1, "empty features file");
  const csv::Header header(line);
  const auto c_id = header.at("design_id");
  const auto c_td = header.at("target_delay");
  const auto c_ut = header.at("utilization");
  const auto c_size = header.at("size");
  const auto c_mfo = header.at("mfo");
  std::vector<std::size_t> c_spfo;
  while (header.has("spfo_" + std::to_string(c_spfo.size())))
    c_spfo.push_back(header.at("spfo_" + std::to_string(c_spfo.size())));

  std::vector<DesignInstance> rows;
  std::size_t row = 1;
  while (csv::next_line(in, line)) {
    ++row;
    const auto f = csv::split(line);
    if (f.size() != header.size())
      throw csv::CsvError(row, "expected " + std::to_string(header.size()) + " fields, got " +
                                   std::to_string(f.size()));
    DesignInstance d;
    const auto id = csv::to_int(f[c_id], row, "design_id");
    if (id < 0) throw csv::CsvError(row, "negative design_id");
    d.design_id = static_cast<std::size_t>(id);
    d.features.target_delay = csv::to_real(f[c_td], row, "target_delay");
    d.features.utilization = csv::to_real(f[c_ut], row, "utilization");
    d.features.size = static_cast<int>(csv::to_int(f[c_size], row, "size"));
    d.features.mfo = static_cast<int>(csv::to_int(f[c_mfo], row, "mfo"));
    for (std::size_t j = 0; j < c_spfo.size(); ++j)
      d.features.spfo.push_back(csv::to_int(f[c_spfo[j]], row, "spfo_" + std::to_string(j)));
    rows.push_back(std::move(d));
  }
  return rows;
}

std::vector<DesignInstance> read_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_features_csv(in);
}

}  // namespace prefix_dse
