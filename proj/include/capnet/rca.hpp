#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "capnet/csv.hpp"
#include "capnet/error.hpp"
#include "capnet/matrix.hpp"
#include "capnet/trade.hpp"

namespace capnet {

// Revealed comparative advantage: the export share of product p in country c
// over the share of p in the world market.
struct RcaMatrix {
  std::vector<std::string> countries;
  std::vector<std::string> products;
  Grid<double> rca;
  double source_total = 0.0;  // world export sum of the source table
  // labels removed before computation because their row/column total was zero
  std::vector<std::string> dropped_countries;
  std::vector<std::string> dropped_products;
};

// 0/1 country-product adjacency from thresholding an RcaMatrix at R*.
// Label vectors may be empty for model-generated networks; when present their
// lengths match the adjacency dimensions.
struct BipartiteNetwork {
  std::vector<std::string> countries;
  std::vector<std::string> products;
  BitMatrix adjacency;
  double threshold = 0.0;

  std::size_t country_count() const { return adjacency.rows(); }
  std::size_t product_count() const { return adjacency.cols(); }
  std::size_t edge_count() const { return adjacency.count(); }
};

inline RcaMatrix compute_rca(const ExportTable& table) {
  const std::size_t nc = table.countries.size();
  const std::size_t np = table.products.size();
  std::vector<double> row_totals(nc, 0.0), col_totals(np, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t j = 0; j < np; ++j) {
      const double v = table.values(i, j);
      row_totals[i] += v;
      col_totals[j] += v;
      total += v;
    }
  if (total <= 0.0) throw validation_error("compute_rca: table has no positive entries");

  RcaMatrix result;
  result.source_total = total;
  std::vector<std::size_t> keep_rows, keep_cols;
  for (std::size_t i = 0; i < nc; ++i) {
    if (row_totals[i] > 0.0) {
      keep_rows.push_back(i);
      result.countries.push_back(table.countries[i]);
    } else {
      result.dropped_countries.push_back(table.countries[i]);
    }
  }
  for (std::size_t j = 0; j < np; ++j) {
    if (col_totals[j] > 0.0) {
      keep_cols.push_back(j);
      result.products.push_back(table.products[j]);
    } else {
      result.dropped_products.push_back(table.products[j]);
    }
  }

  result.rca = Grid<double>(keep_rows.size(), keep_cols.size());
  for (std::size_t i = 0; i < keep_rows.size(); ++i)
    for (std::size_t j = 0; j < keep_cols.size(); ++j) {
      const double x = table.values(keep_rows[i], keep_cols[j]);
      const double country_share = x / row_totals[keep_rows[i]];
      const double world_share = col_totals[keep_cols[j]] / total;
      result.rca(i, j) = country_share / world_share;
    }
  return result;
}

// Inclusive comparison: a cell is linked iff rca >= r_star.
inline BipartiteNetwork threshold(const RcaMatrix& rca, double r_star) {
  if (!(r_star > 0.0)) throw validation_error("threshold: R* must be positive");
  BipartiteNetwork net;
  net.countries = rca.countries;
  net.products = rca.products;
  net.threshold = r_star;
  net.adjacency = BitMatrix(rca.countries.size(), rca.products.size());
  for (std::size_t i = 0; i < rca.countries.size(); ++i)
    for (std::size_t j = 0; j < rca.products.size(); ++j)
      if (rca.rca(i, j) >= r_star) net.adjacency.set(i, j);
  return net;
}

struct TriangularOrder {
  std::vector<std::size_t> row_order;  // countries by decreasing diversification
  std::vector<std::size_t> col_order;  // products by decreasing ubiquity
};

// Row/column permutation that exposes the triangular shape: countries sorted
// by decreasing degree, products likewise, ties broken by label.
inline TriangularOrder triangular_order(const BipartiteNetwork& net) {
  const std::size_t nc = net.country_count();
  const std::size_t np = net.product_count();
  if (nc == 0 || np == 0) throw validation_error("triangular_order: empty network");
  std::vector<std::size_t> row_degree(nc), col_degree(np, 0);
  for (std::size_t i = 0; i < nc; ++i) {
    row_degree[i] = net.adjacency.ones_in_row(i);
    for (std::size_t j = 0; j < np; ++j)
      if (net.adjacency.test(i, j)) ++col_degree[j];
  }
  auto label_of = [](const std::vector<std::string>& labels, std::size_t i) {
    return i < labels.size() ? labels[i] : std::string();
  };
  TriangularOrder order;
  order.row_order.resize(nc);
  order.col_order.resize(np);
  std::iota(order.row_order.begin(), order.row_order.end(), std::size_t{0});
  std::iota(order.col_order.begin(), order.col_order.end(), std::size_t{0});
  std::sort(order.row_order.begin(), order.row_order.end(), [&](std::size_t a, std::size_t b) {
    if (row_degree[a] != row_degree[b]) return row_degree[a] > row_degree[b];
    return label_of(net.countries, a) < label_of(net.countries, b);
  });
  std::sort(order.col_order.begin(), order.col_order.end(), [&](std::size_t a, std::size_t b) {
    if (col_degree[a] != col_degree[b]) return col_degree[a] > col_degree[b];
    return label_of(net.products, a) < label_of(net.products, b);
  });
  return order;
}

// Zero-padded so lexicographic label order equals index order; matrices
// survive a round trip through label-sorting consumers unchanged.
inline std::vector<std::string> indexed_labels(char prefix, std::size_t count) {
  const std::size_t width = std::to_string(count == 0 ? 0 : count - 1).size();
  std::vector<std::string> labels(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string digits = std::to_string(i);
    labels[i] = prefix + std::string(width - digits.size(), '0') + digits;
  }
  return labels;
}

inline std::vector<std::string> country_labels(const BipartiteNetwork& net) {
  if (!net.countries.empty()) return net.countries;
  return indexed_labels('C', net.country_count());
}

inline std::vector<std::string> product_labels(const BipartiteNetwork& net) {
  if (!net.products.empty()) return net.products;
  return indexed_labels('P', net.product_count());
}

inline void write_rca_matrix(const std::filesystem::path& path, const RcaMatrix& rca) {
  write_labeled_matrix(path, rca.countries, rca.products,
                       [&](std::size_t i, std::size_t j) { return format_double(rca.rca(i, j)); });
}

// log10 companion of the RCA matrix for rendering; zeros emit empty fields.
inline void write_rca_log10(const std::filesystem::path& path, const RcaMatrix& rca) {
  write_labeled_matrix(path, rca.countries, rca.products, [&](std::size_t i, std::size_t j) {
    const double v = rca.rca(i, j);
    return v > 0.0 ? format_double(std::log10(v)) : std::string();
  });
}

inline RcaMatrix read_rca_matrix(const std::filesystem::path& path) {
  LabeledMatrix m = read_labeled_matrix(path);
  RcaMatrix rca;
  rca.countries = std::move(m.row_labels);
  rca.products = std::move(m.col_labels);
  rca.rca = std::move(m.values);
  for (std::size_t i = 0; i < rca.countries.size(); ++i)
    for (std::size_t j = 0; j < rca.products.size(); ++j)
      if (!std::isfinite(rca.rca(i, j)) || rca.rca(i, j) < 0.0)
        throw validation_error(path.string() + ": RCA values must be finite and >= 0");
  return rca;
}

inline void write_network(const std::filesystem::path& path, const BipartiteNetwork& net) {
  write_labeled_matrix(path, country_labels(net), product_labels(net),
                       [&](std::size_t i, std::size_t j) {
                         return net.adjacency.test(i, j) ? std::string("1") : std::string("0");
                       });
}

inline void write_edge_list(const std::filesystem::path& path, const BipartiteNetwork& net) {
  const auto countries = country_labels(net);
  const auto products = product_labels(net);
  std::ostringstream out;
  out << "country,product\n";
  for (std::size_t i = 0; i < net.country_count(); ++i)
    for (std::size_t j = 0; j < net.product_count(); ++j)
      if (net.adjacency.test(i, j)) out << countries[i] << ',' << products[j] << '\n';
  write_text_file(path, out.str());
}

inline BipartiteNetwork read_network(const std::filesystem::path& path) {
  LabeledMatrix m = read_labeled_matrix(path);
  BipartiteNetwork net;
  net.countries = std::move(m.row_labels);
  net.products = std::move(m.col_labels);
  net.adjacency = BitMatrix(net.countries.size(), net.products.size());
  for (std::size_t i = 0; i < net.countries.size(); ++i)
    for (std::size_t j = 0; j < net.products.size(); ++j) {
      const double v = m.values(i, j);
      if (v != 0.0 && v != 1.0)
        throw validation_error(path.string() + ": adjacency entries must be 0 or 1");
      if (v == 1.0) net.adjacency.set(i, j);
    }
  return net;
}

}  // namespace capnet
