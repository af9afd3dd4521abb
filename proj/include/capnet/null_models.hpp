#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "capnet/error.hpp"
#include "capnet/metrics.hpp"
#include "capnet/random.hpp"
#include "capnet/rca.hpp"
#include "capnet/stats.hpp"

namespace capnet {

// The four randomized ensembles. Names state what each provably preserves;
// the shuffle models are labelled by the axis being permuted.
//   NM1 preserves the total edge count only.
//   NM2 permutes within each column: every product ubiquity is preserved.
//   NM3 permutes within each row: every country diversification is preserved.
//   NM4 preserves both degree sequences exactly via checkerboard swaps.
enum class NullModel { NM1 = 1, NM2 = 2, NM3 = 3, NM4 = 4 };

struct EnsembleSpec {
  NullModel model = NullModel::NM1;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  std::size_t swap_factor = 100;  // NM4 only: attempts = swap_factor * edges

  void validate() const {
    if (replicates < 1) throw validation_error("EnsembleSpec: replicates must be >= 1");
    if (swap_factor < 1) throw validation_error("EnsembleSpec: swap_factor must be >= 1");
  }
};

// Same number of links, placed uniformly at random without replacement.
inline BipartiteNetwork null1(const BipartiteNetwork& net, std::uint64_t seed) {
  const std::size_t nc = net.country_count();
  const std::size_t np = net.product_count();
  const std::size_t cells = nc * np;
  const std::size_t edges = net.edge_count();
  BipartiteNetwork out = net;
  out.adjacency = BitMatrix(nc, np);
  Rng rng(seed);
  // partial Fisher-Yates over cell indices: first `edges` entries are a
  // uniform sample without replacement
  std::vector<std::uint32_t> index(cells);
  std::iota(index.begin(), index.end(), 0u);
  for (std::size_t i = 0; i < edges; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(cells - i));
    std::swap(index[i], index[j]);
    out.adjacency.set(index[i] / np, index[i] % np);
  }
  return out;
}

namespace detail {

template <typename Get, typename Set>
void shuffle_lane(std::size_t length, Rng& rng, Get&& get, Set&& set) {
  std::vector<char> lane(length);
  for (std::size_t k = 0; k < length; ++k) lane[k] = get(k);
  for (std::size_t k = length; k > 1; --k)
    std::swap(lane[k - 1], lane[static_cast<std::size_t>(rng.below(k))]);
  for (std::size_t k = 0; k < length; ++k) set(k, lane[k] != 0);
}

}  // namespace detail

// Each column independently permuted; column sums (product ubiquity) exact.
inline BipartiteNetwork null2(const BipartiteNetwork& net, std::uint64_t seed) {
  BipartiteNetwork out = net;
  Rng rng(seed);
  for (std::size_t j = 0; j < net.product_count(); ++j)
    detail::shuffle_lane(
        net.country_count(), rng, [&](std::size_t i) { return net.adjacency.test(i, j); },
        [&](std::size_t i, bool v) { out.adjacency.assign(i, j, v); });
  return out;
}

// Each row independently permuted; row sums (country diversification) exact.
inline BipartiteNetwork null3(const BipartiteNetwork& net, std::uint64_t seed) {
  BipartiteNetwork out = net;
  Rng rng(seed);
  for (std::size_t i = 0; i < net.country_count(); ++i)
    detail::shuffle_lane(
        net.product_count(), rng, [&](std::size_t j) { return net.adjacency.test(i, j); },
        [&](std::size_t j, bool v) { out.adjacency.assign(i, j, v); });
  return out;
}

struct SwapResult {
  BipartiteNetwork network;
  std::uint64_t attempts = 0;
  std::uint64_t accepted = 0;
  // no checkerboard swap was ever accepted; the input came back unchanged
  bool unchanged() const { return accepted == 0; }
};

// Degree-preserving randomization: pick two edges (c,p), (c',p') with the
// opposite corners empty and rewire to (c,p'), (c',p). Rejected attempts
// count toward the budget, so the runtime is bounded by swap_factor * edges.
inline SwapResult null4(const BipartiteNetwork& net, std::uint64_t seed,
                        std::size_t swap_factor = 100) {
  if (swap_factor < 1) throw validation_error("null4: swap_factor must be >= 1");
  SwapResult result;
  result.network = net;
  const std::size_t edges = net.edge_count();
  if (edges < 2) return result;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_list;
  edge_list.reserve(edges);
  for (std::size_t i = 0; i < net.country_count(); ++i)
    for (std::size_t j = 0; j < net.product_count(); ++j)
      if (net.adjacency.test(i, j))
        edge_list.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));

  Rng rng(seed);
  BitMatrix& m = result.network.adjacency;
  result.attempts = static_cast<std::uint64_t>(swap_factor) * edges;
  for (std::uint64_t t = 0; t < result.attempts; ++t) {
    const std::size_t a = static_cast<std::size_t>(rng.below(edges));
    const std::size_t b = static_cast<std::size_t>(rng.below(edges));
    auto [c1, p1] = edge_list[a];
    auto [c2, p2] = edge_list[b];
    if (c1 == c2 || p1 == p2) continue;
    if (m.test(c1, p2) || m.test(c2, p1)) continue;
    m.reset(c1, p1);
    m.reset(c2, p2);
    m.set(c1, p2);
    m.set(c2, p1);
    edge_list[a] = {c1, p2};
    edge_list[b] = {c2, p1};
    ++result.accepted;
  }
  return result;
}

inline BipartiteNetwork run_null_model(const BipartiteNetwork& net, NullModel model,
                                       std::uint64_t seed, std::size_t swap_factor = 100) {
  switch (model) {
    case NullModel::NM1: return null1(net, seed);
    case NullModel::NM2: return null2(net, seed);
    case NullModel::NM3: return null3(net, seed);
    case NullModel::NM4: return null4(net, seed, swap_factor).network;
  }
  throw validation_error("run_null_model: unknown model");
}

struct EnsembleBin {
  double k0 = 0.0;
  double mean_k1 = 0.0;  // mean over replicates of the per-replicate bin mean
  double std_k1 = 0.0;   // population std over replicates of the same
  std::size_t replicates = 0;
};

struct EnsembleSummary {
  std::vector<EnsembleBin> country_bins;
  std::vector<EnsembleBin> product_bins;
  std::size_t replicates = 0;
  // least-squares slope of log10(k1) on log10(k0) per replicate, aggregated
  double country_slope_mean = 0.0, country_slope_std = 0.0;
  double product_slope_mean = 0.0, product_slope_std = 0.0;
};

// Share of empirical diagram points falling outside the ensemble's per-bin
// n-sigma band. A k0 bin the ensemble never produced counts as outside: the
// null assigns it no mass at all.
inline double band_violation_share(const std::vector<std::pair<double, double>>& empirical,
                                   const std::vector<EnsembleBin>& bins, double n_sigma = 2.0) {
  if (empirical.empty()) throw validation_error("band_violation_share: empty diagram");
  std::size_t outside = 0;
  for (const auto& [k0, k1] : empirical) {
    const auto it = std::find_if(bins.begin(), bins.end(),
                                 [&](const EnsembleBin& b) { return b.k0 == k0; });
    if (it == bins.end() || std::abs(k1 - it->mean_k1) > n_sigma * it->std_k1) ++outside;
  }
  return static_cast<double>(outside) / static_cast<double>(empirical.size());
}

namespace detail {

inline std::vector<EnsembleBin> aggregate_bins(
    const std::map<double, std::vector<double>>& per_bin) {
  std::vector<EnsembleBin> bins;
  bins.reserve(per_bin.size());
  for (const auto& [k0, means] : per_bin) {
    EnsembleBin bin;
    bin.k0 = k0;
    bin.replicates = means.size();
    bin.mean_k1 = mean(means);
    double ss = 0.0;
    for (double v : means) ss += (v - bin.mean_k1) * (v - bin.mean_k1);
    bin.std_k1 = std::sqrt(ss / static_cast<double>(means.size()));
    bins.push_back(bin);
  }
  return bins;
}

inline void bin_means(const std::vector<std::pair<double, double>>& points,
                      std::map<double, std::vector<double>>& per_bin) {
  std::map<double, std::pair<double, std::size_t>> sums;
  for (const auto& [k0, k1] : points) {
    auto& [sum, count] = sums[k0];
    sum += k1;
    ++count;
  }
  for (const auto& [k0, sc] : sums) per_bin[k0].push_back(sc.first / static_cast<double>(sc.second));
}

}  // namespace detail

// slope of log10(k1) on log10(k0); the diagram is hyperbolic, so the log-log
// slope is the scale-free summary. Undefined when k0 has no spread.
inline std::optional<double> diagram_log_slope(const std::vector<std::pair<double, double>>& points) {
  std::vector<double> xs, ys;
  xs.reserve(points.size());
  ys.reserve(points.size());
  for (const auto& [x, y] : points) {
    if (x <= 0.0 || y <= 0.0) continue;
    xs.push_back(std::log10(x));
    ys.push_back(std::log10(y));
  }
  if (xs.size() < 2) return std::nullopt;
  const double first = xs.front();
  if (std::all_of(xs.begin(), xs.end(), [&](double v) { return v == first; })) return std::nullopt;
  return least_squares_line(xs, ys).slope;
}

// Runs the chosen null model `replicates` times with per-replicate derived
// seeds and aggregates both diagrams by integer k0 bin.
inline EnsembleSummary ensemble_diagram(const BipartiteNetwork& net, const EnsembleSpec& spec) {
  spec.validate();
  if (spec.replicates < 2)
    throw validation_error("ensemble_diagram: need replicates >= 2 for standard deviations");
  std::map<double, std::vector<double>> country_bins, product_bins;
  std::vector<double> country_slopes, product_slopes;
  for (std::size_t i = 0; i < spec.replicates; ++i) {
    const BipartiteNetwork replicate =
        run_null_model(net, spec.model, derive_seed(spec.seed, i), spec.swap_factor);
    const DegreeProfile profile = degree_profile(replicate);
    const auto country_points = diagram(profile, DiagramSide::Country);
    const auto product_points = diagram(profile, DiagramSide::Product);
    detail::bin_means(country_points, country_bins);
    detail::bin_means(product_points, product_bins);
    if (const auto slope = diagram_log_slope(country_points)) country_slopes.push_back(*slope);
    if (const auto slope = diagram_log_slope(product_points)) product_slopes.push_back(*slope);
  }
  EnsembleSummary summary;
  summary.replicates = spec.replicates;
  summary.country_bins = detail::aggregate_bins(country_bins);
  summary.product_bins = detail::aggregate_bins(product_bins);
  auto slope_stats = [](const std::vector<double>& slopes, double& out_mean, double& out_std) {
    if (slopes.empty()) return;
    out_mean = mean(slopes);
    double ss = 0.0;
    for (double s : slopes) ss += (s - out_mean) * (s - out_mean);
    out_std = std::sqrt(ss / static_cast<double>(slopes.size()));
  };
  slope_stats(country_slopes, summary.country_slope_mean, summary.country_slope_std);
  slope_stats(product_slopes, summary.product_slope_mean, summary.product_slope_std);
  return summary;
}

}  // namespace capnet
