#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "capnet/error.hpp"
#include "capnet/rca.hpp"

namespace capnet {

// Degree metrics of the bipartite network. k_c1 is the mean ubiquity of a
// country's export basket; k_p1 the mean diversification of a product's
// exporters. Both are undefined on zero-degree rows/columns and are carried
// as empty optionals, never zero-filled.
struct DegreeProfile {
  std::vector<std::size_t> k_c0;                // diversification per country
  std::vector<std::size_t> k_p0;                // ubiquity per product
  std::vector<std::optional<double>> k_c1;
  std::vector<std::optional<double>> k_p1;
  std::size_t edges = 0;
};

inline DegreeProfile degree_profile(const BipartiteNetwork& net) {
  const std::size_t nc = net.country_count();
  const std::size_t np = net.product_count();
  DegreeProfile p;
  p.k_c0.resize(nc, 0);
  p.k_p0.resize(np, 0);
  for (std::size_t i = 0; i < nc; ++i) {
    p.k_c0[i] = net.adjacency.ones_in_row(i);
    p.edges += p.k_c0[i];
    for (std::size_t j = 0; j < np; ++j)
      if (net.adjacency.test(i, j)) ++p.k_p0[j];
  }
  p.k_c1.resize(nc);
  p.k_p1.resize(np);
  for (std::size_t i = 0; i < nc; ++i) {
    if (p.k_c0[i] == 0) continue;
    double sum = 0.0;
    for (std::size_t j = 0; j < np; ++j)
      if (net.adjacency.test(i, j)) sum += static_cast<double>(p.k_p0[j]);
    p.k_c1[i] = sum / static_cast<double>(p.k_c0[i]);
  }
  for (std::size_t j = 0; j < np; ++j) {
    if (p.k_p0[j] == 0) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < nc; ++i)
      if (net.adjacency.test(i, j)) sum += static_cast<double>(p.k_c0[i]);
    p.k_p1[j] = sum / static_cast<double>(p.k_p0[j]);
  }
  return p;
}

// Pairwise co-export counts over the larger ubiquity, condensed upper
// triangle. phi(i, j) for a pair where both products have zero ubiquity is 0
// and flagged undefined.
struct ProximityMatrix {
  std::vector<std::string> products;
  std::vector<std::size_t> ubiquity;
  std::vector<double> upper;  // row-major upper triangle, i < j
  std::size_t n = 0;

  std::size_t pair_index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * n - i * (i + 1) / 2 + (j - i - 1);
  }
  double phi(std::size_t i, std::size_t j) const { return upper[pair_index(i, j)]; }
  bool defined(std::size_t i, std::size_t j) const { return ubiquity[i] + ubiquity[j] > 0; }
  std::size_t undefined_pairs() const {
    std::size_t zero_products = 0;
    for (std::size_t u : ubiquity)
      if (u == 0) ++zero_products;
    return zero_products * (zero_products > 0 ? zero_products - 1 : 0) / 2;
  }
};

inline ProximityMatrix proximity(const BipartiteNetwork& net) {
  const std::size_t np = net.product_count();
  ProximityMatrix prox;
  prox.products = product_labels(net);
  prox.n = np;
  prox.ubiquity.resize(np);
  const BitMatrix by_product = net.adjacency.transposed();  // product rows over countries
  for (std::size_t j = 0; j < np; ++j) prox.ubiquity[j] = by_product.ones_in_row(j);
  prox.upper.resize(np * (np > 0 ? np - 1 : 0) / 2, 0.0);
  const std::size_t words = by_product.words_per_row();
  std::size_t idx = 0;
  for (std::size_t i = 0; i < np; ++i) {
    const std::uint64_t* row_i = by_product.row(i);
    for (std::size_t j = i + 1; j < np; ++j, ++idx) {
      const std::size_t larger = std::max(prox.ubiquity[i], prox.ubiquity[j]);
      if (larger == 0) continue;  // undefined pair, phi stays 0
      const std::size_t co = BitMatrix::and_popcount(row_i, by_product.row(j), words);
      prox.upper[idx] = static_cast<double>(co) / static_cast<double>(larger);
    }
  }
  return prox;
}

// Upper-triangle proximity values only; each unordered pair once, diagonal
// excluded. This is the sample that feeds distribution fits and calibration.
inline std::vector<double> proximity_sample(const BipartiteNetwork& net) {
  const std::size_t np = net.product_count();
  const BitMatrix by_product = net.adjacency.transposed();
  std::vector<std::size_t> ubiquity(np);
  for (std::size_t j = 0; j < np; ++j) ubiquity[j] = by_product.ones_in_row(j);
  std::vector<double> sample;
  sample.reserve(np * (np > 0 ? np - 1 : 0) / 2);
  const std::size_t words = by_product.words_per_row();
  for (std::size_t i = 0; i < np; ++i) {
    const std::uint64_t* row_i = by_product.row(i);
    for (std::size_t j = i + 1; j < np; ++j) {
      const std::size_t larger = std::max(ubiquity[i], ubiquity[j]);
      if (larger == 0) {
        sample.push_back(0.0);
        continue;
      }
      const std::size_t co = BitMatrix::and_popcount(row_i, by_product.row(j), words);
      sample.push_back(static_cast<double>(co) / static_cast<double>(larger));
    }
  }
  return sample;
}

inline double density(const BipartiteNetwork& net) {
  const std::size_t cells = net.country_count() * net.product_count();
  if (cells == 0) throw validation_error("density: zero-dimension network");
  return static_cast<double>(net.edge_count()) / static_cast<double>(cells);
}

enum class DiagramSide { Country, Product };

// (k0, k1) pairs for rows (or columns) with defined k1, sorted by k0.
inline std::vector<std::pair<double, double>> diagram(const DegreeProfile& profile,
                                                      DiagramSide side) {
  std::vector<std::pair<double, double>> points;
  const auto& k0 = side == DiagramSide::Country ? profile.k_c0 : profile.k_p0;
  const auto& k1 = side == DiagramSide::Country ? profile.k_c1 : profile.k_p1;
  for (std::size_t i = 0; i < k0.size(); ++i)
    if (k1[i]) points.emplace_back(static_cast<double>(k0[i]), *k1[i]);
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return points;
}

inline std::vector<std::pair<double, double>> diagram(const BipartiteNetwork& net,
                                                      DiagramSide side) {
  return diagram(degree_profile(net), side);
}

}  // namespace capnet
