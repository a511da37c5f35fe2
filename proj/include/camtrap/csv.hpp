#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace camtrap::csv {

/// One parsed CSV table: header plus rows of unescaped cells. Quoted fields
/// (RFC 4180 style, including embedded commas, quotes and newlines) are
/// supported; CRLF line endings are tolerated.
struct Table {
  std::string name;  // used in error messages, usually the file name
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index for an exact header name; throws ValidationError if absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

Table read_file(const std::filesystem::path& path);
Table read_stream(std::istream& in, const std::string& name);

void write_file(const std::filesystem::path& path, const Table& table);
void write_stream(std::ostream& out, const Table& table);

/// Shortest round-trip formatting for doubles (via std::to_chars).
std::string format_double(double v);

/// Typed cell accessors; errors carry table name and 1-based data row.
double to_double(const Table& t, std::size_t row, std::size_t col);
std::int64_t to_int(const Table& t, std::size_t row, std::size_t col);

}  // namespace camtrap::csv
