#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "capnet/csv.hpp"
#include "capnet/error.hpp"
#include "capnet/matrix.hpp"

namespace capnet {

// One location-activity-value row of a trade file.
struct TradeRecord {
  std::string country;
  std::string product;
  double value = 0.0;  // export dollars, >= 0 and finite
  std::optional<int> year;
};

// Dense country x product export values with lexicographically ordered labels.
struct ExportTable {
  std::vector<std::string> countries;
  std::vector<std::string> products;
  Grid<double> values;  // countries.size() x products.size()
};

// Reads `country,product,value[,year]`. Columns are located by header name;
// extra columns are ignored. Malformed rows (bad value, empty codes) are
// errors carrying the 1-based line number, never silently skipped.
inline std::vector<TradeRecord> parse_trade_csv(const std::filesystem::path& path,
                                                std::optional<int> year_filter = std::nullopt) {
  const CsvTable table = read_csv(path);
  const auto col_country = find_column(table, "country");
  const auto col_product = find_column(table, "product");
  const auto col_value = find_column(table, "value");
  const auto col_year = find_column(table, "year");
  if (!col_country) throw validation_error(path.string() + ": missing required column 'country'");
  if (!col_product) throw validation_error(path.string() + ": missing required column 'product'");
  if (!col_value) throw validation_error(path.string() + ": missing required column 'value'");
  if (year_filter && !col_year)
    throw validation_error(path.string() + ": year filter given but file has no 'year' column");

  std::vector<TradeRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string context = path.string() + ":" + std::to_string(table.line_numbers[i]);
    TradeRecord rec;
    rec.country = row[*col_country];
    rec.product = row[*col_product];
    if (rec.country.empty()) throw validation_error(context + ": empty country code");
    if (rec.product.empty()) throw validation_error(context + ": empty product code");
    rec.value = parse_double(row[*col_value], context);
    if (!std::isfinite(rec.value)) throw validation_error(context + ": value is not finite");
    if (rec.value < 0.0)
      throw validation_error(context + ": negative value " + format_double(rec.value));
    if (col_year && !row[*col_year].empty())
      rec.year = static_cast<int>(parse_long(row[*col_year], context));
    if (year_filter && rec.year != *year_filter) continue;
    records.push_back(std::move(rec));
  }
  return records;
}

// Sums values over duplicate (country, product) pairs. Labels come out in
// lexicographic order so matrix layouts are identical across runs.
inline ExportTable aggregate(std::span<const TradeRecord> records) {
  if (records.empty()) throw validation_error("aggregate: no records");
  std::map<std::string, std::size_t> country_index, product_index;
  for (const auto& r : records) {
    country_index.emplace(r.country, 0);
    product_index.emplace(r.product, 0);
  }
  ExportTable table;
  table.countries.reserve(country_index.size());
  for (auto& [label, idx] : country_index) {
    idx = table.countries.size();
    table.countries.push_back(label);
  }
  table.products.reserve(product_index.size());
  for (auto& [label, idx] : product_index) {
    idx = table.products.size();
    table.products.push_back(label);
  }
  table.values = Grid<double>(table.countries.size(), table.products.size());
  for (const auto& r : records)
    table.values(country_index.at(r.country), product_index.at(r.product)) += r.value;
  return table;
}

inline void write_export_table(const std::filesystem::path& path, const ExportTable& table) {
  write_labeled_matrix(path, table.countries, table.products,
                       [&](std::size_t i, std::size_t j) { return format_double(table.values(i, j)); });
}

inline ExportTable read_export_table(const std::filesystem::path& path) {
  LabeledMatrix m = read_labeled_matrix(path);
  ExportTable table;
  table.countries = std::move(m.row_labels);
  table.products = std::move(m.col_labels);
  table.values = std::move(m.values);
  for (std::size_t i = 0; i < table.countries.size(); ++i)
    for (std::size_t j = 0; j < table.products.size(); ++j) {
      const double v = table.values(i, j);
      if (!std::isfinite(v) || v < 0.0)
        throw validation_error(path.string() + ": export value must be finite and >= 0");
    }
  return table;
}

inline void write_trade_records(const std::filesystem::path& path,
                                std::span<const TradeRecord> records) {
  std::ostringstream out;
  const bool any_year = std::any_of(records.begin(), records.end(),
                                    [](const TradeRecord& r) { return r.year.has_value(); });
  out << (any_year ? "country,product,value,year\n" : "country,product,value\n");
  for (const auto& r : records) {
    out << r.country << ',' << r.product << ',' << format_double(r.value);
    if (any_year) {
      out << ',';
      if (r.year) out << *r.year;
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace capnet
