#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "capnet/binomial_model.hpp"
#include "capnet/dist_fit.hpp"
#include "capnet/error.hpp"
#include "capnet/metrics.hpp"
#include "capnet/parallel.hpp"
#include "capnet/random.hpp"

namespace capnet {

// Density constraint eta = r^(q N_a) solved for q. Values outside (0,1) mark
// the (r, N_a) cell infeasible rather than being clamped.
struct QFromDensity {
  double q = 0.0;
  bool feasible = false;
};

inline QFromDensity q_from_density(double eta, double r, std::size_t n_capabilities) {
  if (!(eta > 0.0 && eta < 1.0)) throw validation_error("q_from_density: eta must be in (0,1)");
  if (!(r > 0.0 && r < 1.0)) throw validation_error("q_from_density: r must be in (0,1)");
  if (n_capabilities < 1) throw validation_error("q_from_density: N_a must be >= 1");
  QFromDensity result;
  result.q = std::log(eta) / (static_cast<double>(n_capabilities) * std::log(r));
  result.feasible = result.q > 0.0 && result.q < 1.0;
  return result;
}

struct CalibrationAxes {
  std::vector<double> r_values;
  std::vector<std::size_t> na_values;

  std::size_t cell_count() const { return r_values.size() * na_values.size(); }
  bool operator==(const CalibrationAxes&) const = default;
};

inline CalibrationAxes make_axes(double r_min, double r_max, double r_step, std::size_t na_min,
                                 std::size_t na_max, std::size_t na_step);

// r in {0.50, 0.52, ..., 0.98}, N_a in {10, 15, ..., 200}; brackets the
// region where the calibrated optima live.
inline CalibrationAxes default_axes() { return make_axes(0.50, 0.98, 0.02, 10, 200, 5); }

inline CalibrationAxes make_axes(double r_min, double r_max, double r_step, std::size_t na_min,
                                 std::size_t na_max, std::size_t na_step) {
  if (!(r_step > 0.0) || na_step == 0) throw validation_error("make_axes: steps must be positive");
  CalibrationAxes axes;
  for (std::size_t i = 0;; ++i) {
    // one multiply per point, snapped, so grid values print cleanly and
    // never drift with the axis length
    const double r = std::round((r_min + static_cast<double>(i) * r_step) * 1e12) / 1e12;
    if (r > r_max + 1e-12) break;
    axes.r_values.push_back(r);
  }
  for (std::size_t na = na_min; na <= na_max; na += na_step) axes.na_values.push_back(na);
  if (axes.r_values.empty() || axes.na_values.empty())
    throw validation_error("make_axes: empty axis");
  return axes;
}

struct GridCell {
  double q = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
  double r2 = std::numeric_limits<double>::quiet_NaN();
  double ks = std::numeric_limits<double>::quiet_NaN();
};

struct CalibrationGrid {
  CalibrationAxes axes;
  std::vector<GridCell> cells;  // row-major: r index * na_count + na index
  std::size_t seeds_per_cell = 0;

  GridCell& at(std::size_t ri, std::size_t ni) { return cells[ri * axes.na_values.size() + ni]; }
  const GridCell& at(std::size_t ri, std::size_t ni) const {
    return cells[ri * axes.na_values.size() + ni];
  }
};

// R-squared layer: for each feasible cell, q from the density constraint and
// the fit of the analytic k_c0-k_c1 curve to the empirical diagram.
inline CalibrationGrid fit_kc0_kc1_grid(std::span<const std::pair<double, double>> diagram_points,
                                        double eta, const CalibrationAxes& axes,
                                        std::size_t n_countries, std::size_t n_products) {
  std::size_t positive = 0;
  for (const auto& [k0, k1] : diagram_points)
    if (k0 > 0.0) ++positive;
  if (positive < 3)
    throw validation_error("fit_kc0_kc1_grid: need at least 3 diagram points with k_c0 > 0");
  const double first_k0 = diagram_points.front().first;
  const bool all_k0_equal = std::all_of(diagram_points.begin(), diagram_points.end(),
                                        [&](const auto& p) { return p.first == first_k0; });
  if (all_k0_equal) throw validation_error("fit_kc0_kc1_grid: degenerate diagram, all k_c0 equal");

  double mean_k1 = 0.0;
  for (const auto& [k0, k1] : diagram_points) mean_k1 += k1;
  mean_k1 /= static_cast<double>(diagram_points.size());
  double ss_tot = 0.0;
  for (const auto& [k0, k1] : diagram_points) ss_tot += (k1 - mean_k1) * (k1 - mean_k1);
  if (ss_tot == 0.0)
    throw validation_error("fit_kc0_kc1_grid: degenerate diagram, constant k_c1 (SS_tot = 0)");

  CalibrationGrid grid;
  grid.axes = axes;
  grid.cells.resize(axes.cell_count());
  for (std::size_t ri = 0; ri < axes.r_values.size(); ++ri) {
    for (std::size_t ni = 0; ni < axes.na_values.size(); ++ni) {
      GridCell& cell = grid.at(ri, ni);
      const auto qd = q_from_density(eta, axes.r_values[ri], axes.na_values[ni]);
      cell.q = qd.q;
      cell.feasible = qd.feasible;
      if (!cell.feasible) continue;
      BinomialParams params{axes.r_values[ri], qd.q, axes.na_values[ni], n_countries, n_products};
      double ss_res = 0.0;
      for (const auto& [k0, k1] : diagram_points) {
        const double pred = expected_k_c1(params, k0);
        ss_res += (k1 - pred) * (k1 - pred);
      }
      cell.r2 = 1.0 - ss_res / ss_tot;
    }
  }
  return grid;
}

// KS layer: per feasible cell, pool proximity samples from `seeds_per_cell`
// simulated worlds at the cell's parameters and take the two-sample KS
// statistic against the empirical proximity sample. Cell seeds derive from
// (master seed, cell index), so results do not depend on execution order.
inline CalibrationGrid proximity_ks_grid(const Sample& empirical_phi, std::size_t n_countries,
                                         std::size_t n_products, double eta,
                                         const CalibrationAxes& axes, std::size_t seeds_per_cell,
                                         std::uint64_t master_seed, std::size_t threads = 0) {
  if (empirical_phi.values.empty())
    throw validation_error("proximity_ks_grid: empty empirical proximity sample");
  if (seeds_per_cell < 1) throw validation_error("proximity_ks_grid: seeds_per_cell must be >= 1");
  CalibrationGrid grid;
  grid.axes = axes;
  grid.seeds_per_cell = seeds_per_cell;
  grid.cells.resize(axes.cell_count());
  const std::size_t na_count = axes.na_values.size();

  parallel_for(
      grid.cells.size(),
      [&](std::size_t index) {
        const std::size_t ri = index / na_count;
        const std::size_t ni = index % na_count;
        GridCell& cell = grid.cells[index];
        const auto qd = q_from_density(eta, axes.r_values[ri], axes.na_values[ni]);
        cell.q = qd.q;
        cell.feasible = qd.feasible;
        if (!cell.feasible) return;
        BinomialParams params{axes.r_values[ri], qd.q, axes.na_values[ni], n_countries,
                              n_products};
        const std::uint64_t cell_seed = derive_seed(master_seed, index);
        Sample pooled;
        for (std::size_t s = 0; s < seeds_per_cell; ++s) {
          const CapabilityWorld world = sample_world(params, derive_seed(cell_seed, s));
          const std::vector<double> phi = proximity_sample(leontief(world));
          pooled.values.insert(pooled.values.end(), phi.begin(), phi.end());
        }
        if (pooled.values.empty()) throw error("proximity_ks_grid: empty simulated sample");
        cell.ks = ks_statistic(empirical_phi, pooled);
      },
      threads);
  return grid;
}

struct ChosenPoint {
  std::size_t r_index = 0;
  std::size_t na_index = 0;
  double r = 0.0;
  std::size_t n_capabilities = 0;
  double q = 0.0;
  double r2 = 0.0;
  double ks = 0.0;
};

struct CalibrationResult {
  ChosenPoint chosen;
  std::vector<std::pair<std::size_t, std::size_t>> region;  // (r index, na index)
  double r2_quantile = 0.0;
  double ks_quantile = 0.0;
  std::vector<double> r_c;  // filled by the heterogeneous refit stage
};

// Cells in the top r2_quantile of R-squared AND the bottom ks_quantile of KS.
// The chosen point minimizes KS inside the region; ties break to higher
// R-squared, then smaller N_a, then smaller r.
inline CalibrationResult intersect(const CalibrationGrid& r2_layer, const CalibrationGrid& ks_layer,
                                   double r2_quantile = 0.10, double ks_quantile = 0.10) {
  if (!(r2_layer.axes == ks_layer.axes))
    throw validation_error("intersect: layers computed over different grids");
  if (!(r2_quantile > 0.0 && r2_quantile <= 1.0 && ks_quantile > 0.0 && ks_quantile <= 1.0))
    throw validation_error("intersect: quantiles must be in (0,1]");

  std::vector<double> r2_values, ks_values;
  for (std::size_t i = 0; i < r2_layer.cells.size(); ++i) {
    if (r2_layer.cells[i].feasible && std::isfinite(r2_layer.cells[i].r2))
      r2_values.push_back(r2_layer.cells[i].r2);
    if (ks_layer.cells[i].feasible && std::isfinite(ks_layer.cells[i].ks))
      ks_values.push_back(ks_layer.cells[i].ks);
  }
  if (r2_values.empty() || ks_values.empty())
    throw error("intersect: no feasible cells with defined statistics");

  std::sort(r2_values.begin(), r2_values.end(), std::greater<>());
  std::sort(ks_values.begin(), ks_values.end());
  const std::size_t keep_r2 = std::min(
      r2_values.size(),
      static_cast<std::size_t>(std::ceil(r2_quantile * static_cast<double>(r2_values.size()))));
  const std::size_t keep_ks = std::min(
      ks_values.size(),
      static_cast<std::size_t>(std::ceil(ks_quantile * static_cast<double>(ks_values.size()))));
  const double r2_threshold = r2_values[keep_r2 - 1];
  const double ks_threshold = ks_values[keep_ks - 1];

  CalibrationResult result;
  result.r2_quantile = r2_quantile;
  result.ks_quantile = ks_quantile;
  const std::size_t na_count = r2_layer.axes.na_values.size();
  for (std::size_t i = 0; i < r2_layer.cells.size(); ++i) {
    const GridCell& rc = r2_layer.cells[i];
    const GridCell& kc = ks_layer.cells[i];
    if (!rc.feasible || !kc.feasible) continue;
    if (!(std::isfinite(rc.r2) && rc.r2 >= r2_threshold)) continue;
    if (!(std::isfinite(kc.ks) && kc.ks <= ks_threshold)) continue;
    result.region.emplace_back(i / na_count, i % na_count);
  }
  if (result.region.empty()) {
    std::ostringstream msg;
    msg << "intersect: empty intersection; R2 region (top " << r2_quantile * 100.0
        << "%, threshold " << r2_threshold << ") and KS region (bottom " << ks_quantile * 100.0
        << "%, threshold " << ks_threshold << ") are disjoint. Marginal regions: R2 {";
    for (std::size_t i = 0; i < r2_layer.cells.size(); ++i)
      if (r2_layer.cells[i].feasible && std::isfinite(r2_layer.cells[i].r2) &&
          r2_layer.cells[i].r2 >= r2_threshold)
        msg << " (r=" << r2_layer.axes.r_values[i / na_count]
            << ",na=" << r2_layer.axes.na_values[i % na_count] << ")";
    msg << " }, KS {";
    for (std::size_t i = 0; i < ks_layer.cells.size(); ++i)
      if (ks_layer.cells[i].feasible && std::isfinite(ks_layer.cells[i].ks) &&
          ks_layer.cells[i].ks <= ks_threshold)
        msg << " (r=" << ks_layer.axes.r_values[i / na_count]
            << ",na=" << ks_layer.axes.na_values[i % na_count] << ")";
    msg << " }";
    throw error(msg.str());
  }

  auto better = [&](const std::pair<std::size_t, std::size_t>& a,
                    const std::pair<std::size_t, std::size_t>& b) {
    const GridCell& ka = ks_layer.at(a.first, a.second);
    const GridCell& kb = ks_layer.at(b.first, b.second);
    if (ka.ks != kb.ks) return ka.ks < kb.ks;
    const GridCell& ra = r2_layer.at(a.first, a.second);
    const GridCell& rb = r2_layer.at(b.first, b.second);
    if (ra.r2 != rb.r2) return ra.r2 > rb.r2;
    if (a.second != b.second) return a.second < b.second;  // smaller N_a
    return a.first < b.first;                              // smaller r
  };
  const auto chosen_cell = *std::min_element(result.region.begin(), result.region.end(), better);
  result.chosen.r_index = chosen_cell.first;
  result.chosen.na_index = chosen_cell.second;
  result.chosen.r = r2_layer.axes.r_values[chosen_cell.first];
  result.chosen.n_capabilities = r2_layer.axes.na_values[chosen_cell.second];
  result.chosen.q = r2_layer.at(chosen_cell.first, chosen_cell.second).q;
  result.chosen.r2 = r2_layer.at(chosen_cell.first, chosen_cell.second).r2;
  result.chosen.ks = ks_layer.at(chosen_cell.first, chosen_cell.second).ks;
  return result;
}

struct HeterogeneousRc {
  std::vector<double> r_c;
  std::size_t clipped_low = 0;
  std::size_t clipped_high = 0;
};

// Per-country capability probability implied by the observed diversification:
// the capability-count inversion divided by N_a, clipped to [1e-6, 1 - 1e-6]
// so Bernoulli sampling stays defined for countries outside the model image.
inline HeterogeneousRc heterogeneous_rc(std::span<const double> empirical_k_c0,
                                        const BinomialParams& params) {
  params.validate();
  HeterogeneousRc out;
  out.r_c.reserve(empirical_k_c0.size());
  constexpr double kFloor = 1e-6;
  constexpr double kCeil = 1.0 - 1e-6;
  for (double k0 : empirical_k_c0) {
    if (!(k0 > 0.0))
      throw validation_error("heterogeneous_rc: every retained country needs k_c0 > 0");
    const double k_ca = capabilities_from_diversification(params, k0);
    double rc = k_ca / static_cast<double>(params.n_capabilities);
    if (rc < kFloor) {
      rc = kFloor;
      ++out.clipped_low;
    } else if (rc > kCeil) {
      rc = kCeil;
      ++out.clipped_high;
    }
    out.r_c.push_back(rc);
  }
  return out;
}

struct HistogramPair {
  double lo = 0.0;
  double width = 1.0;
  std::vector<double> empirical;  // fraction of countries per bin
  std::vector<double> simulated;  // replicate-averaged fraction per bin
};

struct HeterogeneousReport {
  double ks = 0.0;  // two-sample KS, pooled simulated vs empirical
  std::size_t replicates = 0;
  std::vector<double> per_country_mean;
  std::vector<double> per_country_std;
  HistogramPair histogram;
};

// Simulates `replicates` heterogeneous worlds and compares the averaged
// diversification distribution with the empirical one. Pooling the replicate
// samples is exactly the replicate-averaged distribution because every
// replicate contributes the same number of countries.
inline HeterogeneousReport heterogeneous_fit_report(std::span<const double> r_c,
                                                    const BinomialParams& params,
                                                    std::span<const double> empirical_k_c0,
                                                    std::size_t replicates, std::uint64_t seed,
                                                    std::size_t threads = 0) {
  params.validate();
  if (r_c.empty()) throw validation_error("heterogeneous_fit_report: empty r_c list");
  if (replicates < 1) throw validation_error("heterogeneous_fit_report: replicates must be >= 1");
  const std::size_t nc = r_c.size();
  std::vector<double> pooled(replicates * nc, 0.0);
  parallel_for(
      replicates,
      [&](std::size_t rep) {
        const CapabilityWorld world = sample_heterogeneous_world(
            r_c, params.q, params.n_capabilities, params.n_products, derive_seed(seed, rep));
        const BipartiteNetwork net = leontief(world);
        for (std::size_t c = 0; c < nc; ++c)
          pooled[rep * nc + c] = static_cast<double>(net.adjacency.ones_in_row(c));
      },
      threads);

  HeterogeneousReport report;
  report.replicates = replicates;
  report.per_country_mean.assign(nc, 0.0);
  report.per_country_std.assign(nc, 0.0);
  for (std::size_t rep = 0; rep < replicates; ++rep)
    for (std::size_t c = 0; c < nc; ++c) report.per_country_mean[c] += pooled[rep * nc + c];
  for (std::size_t c = 0; c < nc; ++c)
    report.per_country_mean[c] /= static_cast<double>(replicates);
  for (std::size_t rep = 0; rep < replicates; ++rep)
    for (std::size_t c = 0; c < nc; ++c) {
      const double d = pooled[rep * nc + c] - report.per_country_mean[c];
      report.per_country_std[c] += d * d;
    }
  for (std::size_t c = 0; c < nc; ++c)
    report.per_country_std[c] = std::sqrt(report.per_country_std[c] / static_cast<double>(replicates));

  Sample sim = make_sample(pooled);
  Sample emp = make_sample(std::vector<double>(empirical_k_c0.begin(), empirical_k_c0.end()));
  report.ks = ks_statistic(emp, sim);

  const double np = static_cast<double>(params.n_products);
  const std::size_t bins = 50;
  report.histogram.lo = 0.0;
  report.histogram.width = std::max(1.0, np / static_cast<double>(bins));
  const std::size_t bin_count =
      static_cast<std::size_t>(std::ceil((np + 1.0) / report.histogram.width));
  report.histogram.empirical.assign(bin_count, 0.0);
  report.histogram.simulated.assign(bin_count, 0.0);
  auto bin_of = [&](double v) {
    return std::min(bin_count - 1,
                    static_cast<std::size_t>(std::max(0.0, v / report.histogram.width)));
  };
  for (double v : empirical_k_c0)
    report.histogram.empirical[bin_of(v)] += 1.0 / static_cast<double>(empirical_k_c0.size());
  for (double v : pooled)
    report.histogram.simulated[bin_of(v)] += 1.0 / static_cast<double>(pooled.size());
  return report;
}

}  // namespace capnet
