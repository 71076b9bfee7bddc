#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prefix_dse::csv {

class CsvError : public std::runtime_error {
 public:
  CsvError(std::size_t row, const std::string& what)
      : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Shortest round-trippable text for a double; stable across runs.
std::string format_real(double v);

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Reads the next non-empty line (CR stripped). Returns false at EOF.
bool next_line(std::istream& in, std::string& line);

double to_real(std::string_view s, std::size_t row, std::string_view column);
std::int64_t to_int(std::string_view s, std::size_t row, std::string_view column);

/// Maps header names to column positions; throws naming the missing column.
class Header {
 public:
  explicit Header(std::string_view line);
  std::size_t at(std::string_view name) const;
  bool has(std::string_view name) const;
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
};

}  // namespace prefix_dse::csv
