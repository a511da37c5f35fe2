#include "camtrap/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "camtrap/error.hpp"

namespace camtrap::csv {

namespace {

// Splits the full text into records, honoring quoted fields. Returns rows of
// raw cells with quotes removed.
std::vector<std::vector<std::string>> parse(const std::string& text,
                                            const std::string& name) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool in_quotes = false;
  bool row_started = false;
  std::size_t line = 1;

  auto end_cell = [&] {
    row.push_back(std::move(cell));
    cell.clear();
  };
  auto end_row = [&] {
    end_cell();
    rows.push_back(std::move(row));
    row.clear();
    row_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        cell += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_started = true;
        break;
      case ',':
        end_cell();
        row_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_started || !cell.empty() || !row.empty()) end_row();
        ++line;
        break;
      default:
        cell += c;
        row_started = true;
        break;
    }
  }
  if (in_quotes) {
    throw ValidationError(name + ": unterminated quoted field at line " +
                          std::to_string(line));
  }
  if (row_started || !cell.empty() || !row.empty()) end_row();
  return rows;
}

bool needs_quoting(const std::string& s) {
  if (s.empty()) return false;
  if (s.front() == ' ' || s.back() == ' ') return true;
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

void write_cell(std::ostream& out, const std::string& s) {
  if (!needs_quoting(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

std::size_t Table::column(const std::string& col) const {
  auto it = std::find(header.begin(), header.end(), col);
  if (it == header.end()) {
    throw ValidationError(name + ": missing column '" + col + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

bool Table::has_column(const std::string& col) const {
  return std::find(header.begin(), header.end(), col) != header.end();
}

Table read_stream(std::istream& in, const std::string& name) {
  std::ostringstream buf;
  buf << in.rdbuf();
  auto records = parse(buf.str(), name);
  Table t;
  t.name = name;
  if (records.empty()) {
    throw ValidationError(name + ": empty file (header row required)");
  }
  t.header = std::move(records.front());
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != t.header.size()) {
      throw ValidationError(name + ": row " + std::to_string(i) + " has " +
                            std::to_string(records[i].size()) + " cells, expected " +
                            std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[i]));
  }
  return t;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open '" + path.string() + "'");
  }
  return read_stream(in, path.filename().string());
}

void write_stream(std::ostream& out, const Table& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    write_cell(out, table.header[i]);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      write_cell(out, row[i]);
    }
    out << '\n';
  }
}

void write_file(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write '" + path.string() + "'");
  }
  write_stream(out, table);
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double to_double(const Table& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows[row][col];
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ValidationError(t.name + ": row " + std::to_string(row + 1) +
                          ", column '" + t.header[col] + "': not a number: '" + s + "'");
  }
  return v;
}

std::int64_t to_int(const Table& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows[row][col];
  std::int64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ValidationError(t.name + ": row " + std::to_string(row + 1) +
                          ", column '" + t.header[col] + "': not an integer: '" + s + "'");
  }
  return v;
}

}  // namespace camtrap::csv
