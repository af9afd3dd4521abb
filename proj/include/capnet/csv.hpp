#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "capnet/error.hpp"
#include "capnet/matrix.hpp"

namespace capnet {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // data rows, header excluded
  std::vector<std::size_t> line_numbers;       // 1-based source line per data row
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace detail

// Plain comma-separated values, UTF-8, no quoting. First line is the header.
// Blank lines are skipped. Rows with a field count different from the header
// are rejected with their line number.
inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open file: " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    for (auto& f : fields) f = std::string(detail::trim(f));
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw validation_error(path.string() + ":" + std::to_string(line_no) +
                             ": expected " + std::to_string(table.header.size()) +
                             " fields, got " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) throw validation_error("empty file: " + path.string());
  return table;
}

inline std::optional<std::size_t> find_column(const CsvTable& table, std::string_view name) {
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (table.header[j] == name) return j;
  return std::nullopt;
}

// Strict full-string parse; `context` names the file location for the error.
inline double parse_double(std::string_view text, const std::string& context) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw validation_error(context + ": not a number: '" + std::string(text) + "'");
  return value;
}

inline long parse_long(std::string_view text, const std::string& context) {
  long value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw validation_error(context + ": not an integer: '" + std::string(text) + "'");
  return value;
}

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double value) {
  char buf[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == value) break;
  }
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot write file: " + path.string());
  out << content;
  if (!out) throw error("write failed: " + path.string());
}

// Dense labeled matrix: header `label,<col labels...>`, one row per row label.
template <typename ValueAt>
void write_labeled_matrix(const std::filesystem::path& path,
                          const std::vector<std::string>& row_labels,
                          const std::vector<std::string>& col_labels, ValueAt&& value_at) {
  std::ostringstream out;
  out << "label";
  for (const auto& c : col_labels) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < row_labels.size(); ++i) {
    out << row_labels[i];
    for (std::size_t j = 0; j < col_labels.size(); ++j) out << ',' << value_at(i, j);
    out << '\n';
  }
  write_text_file(path, out.str());
}

struct LabeledMatrix {
  std::vector<std::string> row_labels, col_labels;
  Grid<double> values;
};

inline LabeledMatrix read_labeled_matrix(const std::filesystem::path& path) {
  CsvTable table = read_csv(path);
  if (table.header.size() < 2)
    throw validation_error(path.string() + ": labeled matrix needs at least one column");
  LabeledMatrix m;
  m.col_labels.assign(table.header.begin() + 1, table.header.end());
  m.values = Grid<double>(table.rows.size(), m.col_labels.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    m.row_labels.push_back(row[0]);
    const std::string context = path.string() + ":" + std::to_string(table.line_numbers[i]);
    for (std::size_t j = 0; j + 1 < row.size(); ++j)
      m.values(i, j) = parse_double(row[j + 1], context);
  }
  return m;
}

}  // namespace capnet
