#include "prefix_dse/csv.hpp"

#include <charconv>
#include <cmath>

namespace prefix_dse::csv {

std::string format_real(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

double to_real(std::string_view s, std::size_t row, std::string_view column) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || !std::isfinite(v))
    throw CsvError(row, "bad number '" + std::string(s) + "' in column " + std::string(column));
  return v;
}

std::int64_t to_int(std::string_view s, std::size_t row, std::string_view column) {
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw CsvError(row, "bad integer '" + std::string(s) + "' in column " + std::string(column));
  return v;
}

Header::Header(std::string_view line) : names_(split(line)) {}

std::size_t Header::at(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  throw CsvError(1, "missing column " + std::string(name));
}

bool Header::has(std::string_view name) const {
  for (const auto& n : names_)
    if (n == name) return true;
  return false;
}

}  // namespace prefix_dse::csv
