#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dsnls {

inline constexpr int kCsvSchemaVersion = 1;

/// Shortest text that parses back to the same double ("%.17g").
std::string format_double(double value);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

/// Parses a real number; also accepts integer powers written "2^-6".
/// Returns false on any trailing garbage.
bool parse_real(std::string_view text, double& value);
bool parse_int(std::string_view text, long long& value);

/// Plain comma-separated table with a header row. Cells are preformatted.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  /// Throws std::invalid_argument on a width mismatch.
  void add_row(std::vector<std::string> cells);

  void write(std::ostream& out) const;
  /// Throws std::runtime_error when the file cannot be written.
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace dsnls
