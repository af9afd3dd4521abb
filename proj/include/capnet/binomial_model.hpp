#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "capnet/error.hpp"
#include "capnet/matrix.hpp"
#include "capnet/random.hpp"
#include "capnet/rca.hpp"

namespace capnet {

// The capabilities model with i.i.d. Bernoulli entries: a country holds each
// capability with probability r, a product requires each with probability q.
struct BinomialParams {
  double r = 0.5;                 // probability a country has a capability
  double q = 0.5;                 // probability a product requires a capability
  std::size_t n_capabilities = 1;
  std::size_t n_countries = 1;
  std::size_t n_products = 1;

  void validate() const {
    if (!(r > 0.0 && r < 1.0)) throw validation_error("BinomialParams: r must be in (0,1)");
    if (!(q > 0.0 && q < 1.0)) throw validation_error("BinomialParams: q must be in (0,1)");
    if (n_capabilities < 1) throw validation_error("BinomialParams: N_a must be >= 1");
    if (n_countries < 1 || n_products < 1)
      throw validation_error("BinomialParams: world dimensions must be >= 1");
  }
};

struct CapabilityWorld {
  BitMatrix country_caps;   // N_c x N_a
  BitMatrix product_reqs;   // N_p x N_a
  std::vector<std::size_t> caps_per_country;
  std::vector<std::size_t> reqs_per_product;

  std::size_t n_capabilities() const { return country_caps.cols(); }
};

namespace detail {

inline void fill_bernoulli(BitMatrix& m, Rng& rng, double p) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (rng.bernoulli(p)) m.set(i, j);
}

inline std::vector<std::size_t> row_counts(const BitMatrix& m) {
  std::vector<std::size_t> counts(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) counts[i] = m.ones_in_row(i);
  return counts;
}

}  // namespace detail

inline CapabilityWorld sample_world(const BinomialParams& params, std::uint64_t seed) {
  params.validate();
  CapabilityWorld world;
  world.country_caps = BitMatrix(params.n_countries, params.n_capabilities);
  world.product_reqs = BitMatrix(params.n_products, params.n_capabilities);
  Rng rng(seed);
  detail::fill_bernoulli(world.country_caps, rng, params.r);
  detail::fill_bernoulli(world.product_reqs, rng, params.q);
  world.caps_per_country = detail::row_counts(world.country_caps);
  world.reqs_per_product = detail::row_counts(world.product_reqs);
  return world;
}

// Per-country capability probabilities; the product side stays Bernoulli(q).
inline CapabilityWorld sample_heterogeneous_world(std::span<const double> r_by_country, double q,
                                                  std::size_t n_capabilities,
                                                  std::size_t n_products, std::uint64_t seed) {
  if (r_by_country.empty()) throw validation_error("sample_heterogeneous_world: no countries");
  for (double rc : r_by_country)
    if (!(rc > 0.0 && rc < 1.0))
      throw validation_error("sample_heterogeneous_world: every r_c must be in (0,1)");
  if (!(q > 0.0 && q < 1.0)) throw validation_error("sample_heterogeneous_world: q must be in (0,1)");
  if (n_capabilities < 1) throw validation_error("sample_heterogeneous_world: N_a must be >= 1");
  CapabilityWorld world;
  world.country_caps = BitMatrix(r_by_country.size(), n_capabilities);
  world.product_reqs = BitMatrix(n_products, n_capabilities);
  Rng rng(seed);
  for (std::size_t i = 0; i < r_by_country.size(); ++i)
    for (std::size_t j = 0; j < n_capabilities; ++j)
      if (rng.bernoulli(r_by_country[i])) world.country_caps.set(i, j);
  detail::fill_bernoulli(world.product_reqs, rng, q);
  world.caps_per_country = detail::row_counts(world.country_caps);
  world.reqs_per_product = detail::row_counts(world.product_reqs);
  return world;
}

// The subset operator: a country exports a product iff it holds every
// required capability. Products with no requirements are made by everyone.
inline BipartiteNetwork leontief(const CapabilityWorld& world) {
  if (world.country_caps.cols() != world.product_reqs.cols())
    throw validation_error("leontief: capability dimensions do not match");
  BipartiteNetwork net;
  net.adjacency = BitMatrix(world.country_caps.rows(), world.product_reqs.rows());
  const std::size_t words = world.country_caps.words_per_row();
  for (std::size_t c = 0; c < world.country_caps.rows(); ++c) {
    const std::uint64_t* caps = world.country_caps.row(c);
    for (std::size_t p = 0; p < world.product_reqs.rows(); ++p)
      if (BitMatrix::is_subset(world.product_reqs.row(p), caps, words)) net.adjacency.set(c, p);
  }
  return net;
}

// counts[x] = number of products requiring exactly x capabilities
struct RequirementHistogram {
  std::vector<double> counts;

  std::size_t max_requirements() const { return counts.empty() ? 0 : counts.size() - 1; }
  double total() const {
    double t = 0.0;
    for (double c : counts) t += c;
    return t;
  }
};

inline RequirementHistogram requirement_histogram(const CapabilityWorld& world) {
  RequirementHistogram hist;
  hist.counts.assign(world.n_capabilities() + 1, 0.0);
  for (std::size_t x : world.reqs_per_product) hist.counts[x] += 1.0;
  return hist;
}

namespace detail {

inline double log_binomial_coefficient(double n, double w) {
  return std::lgamma(n + 1.0) - std::lgamma(w + 1.0) - std::lgamma(n - w + 1.0);
}

inline double binomial_pmf(std::size_t n, double p, std::size_t k) {
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  return std::exp(log_binomial_coefficient(nd, kd) + kd * std::log(p) +
                  (nd - kd) * std::log1p(-p));
}

}  // namespace detail

// The expected histogram when requirements are Bernoulli(q): N_p times the
// binomial pmf.
inline RequirementHistogram binomial_requirement_histogram(const BinomialParams& params) {
  params.validate();
  RequirementHistogram hist;
  hist.counts.resize(params.n_capabilities + 1);
  for (std::size_t x = 0; x <= params.n_capabilities; ++x)
    hist.counts[x] = static_cast<double>(params.n_products) *
                     detail::binomial_pmf(params.n_capabilities, params.q, x);
  return hist;
}

namespace detail {

inline void require_capability_range(double k_ca, std::size_t n_caps, const char* who) {
  if (!(k_ca >= 0.0 && k_ca <= static_cast<double>(n_caps)))
    throw validation_error(std::string(who) + ": capability count out of [0, N_a]");
}

}  // namespace detail

// Expected diversification of a country holding k_ca of the N_a capabilities,
// for an arbitrary requirement histogram: sum over x of (k_ca/N_a)^x h[x],
// with 0^0 = 1 so requirement-free products count for capability-free
// countries.
inline double mean_field_diversity(const RequirementHistogram& hist, double k_ca,
                                   std::size_t n_capabilities) {
  detail::require_capability_range(k_ca, n_capabilities, "mean_field_diversity");
  if (hist.counts.size() != n_capabilities + 1)
    throw validation_error("mean_field_diversity: histogram length must be N_a + 1");
  const double f = k_ca / static_cast<double>(n_capabilities);
  double acc = 0.0, power = 1.0;
  for (std::size_t x = 0; x < hist.counts.size(); ++x) {
    acc += power * hist.counts[x];
    power *= f;
  }
  return acc;
}

// d/dk of mean_field_diversity: sum over x of h[x] x (k/N_a)^(x-1) / N_a
inline double mean_field_diversity_d1(const RequirementHistogram& hist, double k_ca,
                                      std::size_t n_capabilities) {
  detail::require_capability_range(k_ca, n_capabilities, "mean_field_diversity_d1");
  const double na = static_cast<double>(n_capabilities);
  const double f = k_ca / na;
  double acc = 0.0, power = 1.0;  // power = f^(x-1)
  for (std::size_t x = 1; x < hist.counts.size(); ++x) {
    acc += hist.counts[x] * static_cast<double>(x) * power / na;
    power *= f;
  }
  return acc;
}

// second derivative: sum over x of h[x] x (x-1) (k/N_a)^(x-2) / N_a^2
inline double mean_field_diversity_d2(const RequirementHistogram& hist, double k_ca,
                                      std::size_t n_capabilities) {
  detail::require_capability_range(k_ca, n_capabilities, "mean_field_diversity_d2");
  const double na = static_cast<double>(n_capabilities);
  const double f = k_ca / na;
  double acc = 0.0, power = 1.0;  // power = f^(x-2)
  for (std::size_t x = 2; x < hist.counts.size(); ++x) {
    acc += hist.counts[x] * static_cast<double>(x) * static_cast<double>(x - 1) * power / (na * na);
    power *= f;
  }
  return acc;
}

// Closed binomial form of the expected diversification:
// N_p (q k/N_a + 1 - q)^N_a. Real-valued k_ca is allowed.
inline double expected_diversification(const BinomialParams& params, double k_ca) {
  params.validate();
  detail::require_capability_range(k_ca, params.n_capabilities, "expected_diversification");
  const double na = static_cast<double>(params.n_capabilities);
  return static_cast<double>(params.n_products) *
         std::pow(params.q * k_ca / na + 1.0 - params.q, na);
}

// Large-N_a exponential limit, N_p exp(q (k_ca - N_a)). Diagnostic only;
// never used in calibration.
inline double expected_diversification_exponential(const BinomialParams& params, double k_ca) {
  params.validate();
  detail::require_capability_range(k_ca, params.n_capabilities,
                                   "expected_diversification_exponential");
  return static_cast<double>(params.n_products) *
         std::exp(params.q * (k_ca - static_cast<double>(params.n_capabilities)));
}

// d/dk of expected_diversification: q N_p (q k/N_a + 1 - q)^(N_a - 1)
inline double diversification_slope(const BinomialParams& params, double k_ca) {
  params.validate();
  detail::require_capability_range(k_ca, params.n_capabilities, "diversification_slope");
  const double na = static_cast<double>(params.n_capabilities);
  return params.q * static_cast<double>(params.n_products) *
         std::pow(params.q * k_ca / na + 1.0 - params.q, na - 1.0);
}

// Expected ubiquity of a product requiring k_pa capabilities: N_c r^k_pa.
inline double expected_ubiquity(const BinomialParams& params, double k_pa) {
  params.validate();
  detail::require_capability_range(k_pa, params.n_capabilities, "expected_ubiquity");
  return static_cast<double>(params.n_countries) * std::pow(params.r, k_pa);
}

// Capability count implied by a diversification level (the inversion of the
// closed form): k_ca = (N_a/q) ((k_c0/N_p)^(1/N_a) + q - 1). The result can
// leave [0, N_a] for diversifications outside the model's image; callers
// decide how to clip.
inline double capabilities_from_diversification(const BinomialParams& params, double k_c0) {
  params.validate();
  if (!(k_c0 > 0.0 && k_c0 <= static_cast<double>(params.n_products)))
    throw validation_error("capabilities_from_diversification: k_c0 must be in (0, N_p]");
  const double na = static_cast<double>(params.n_capabilities);
  return (na / params.q) *
         (std::pow(k_c0 / static_cast<double>(params.n_products), 1.0 / na) + params.q - 1.0);
}

// Average ubiquity of a country's products as a function of its
// diversification:
//   (N_p N_c / k_c0) (r (k_c0/N_p)^(1/N_a) + (1-q)(1-r))^N_a
inline double expected_k_c1(const BinomialParams& params, double k_c0) {
  params.validate();
  if (!(k_c0 > 0.0 && k_c0 <= static_cast<double>(params.n_products)))
    throw validation_error("expected_k_c1: k_c0 must be in (0, N_p]");
  const double na = static_cast<double>(params.n_capabilities);
  const double np = static_cast<double>(params.n_products);
  const double base = params.r * std::pow(k_c0 / np, 1.0 / na) + (1.0 - params.q) * (1.0 - params.r);
  return np * static_cast<double>(params.n_countries) / k_c0 * std::pow(base, na);
}

// Same quantity parameterized by the capability count instead:
//   N_c ((r q k/N_a + 1 - q) / (q k/N_a + 1 - q))^N_a
inline double expected_k_c1_from_capabilities(const BinomialParams& params, double k_ca) {
  params.validate();
  detail::require_capability_range(k_ca, params.n_capabilities, "expected_k_c1_from_capabilities");
  const double na = static_cast<double>(params.n_capabilities);
  const double f = k_ca / na;
  const double ratio = (params.r * params.q * f + 1.0 - params.q) / (params.q * f + 1.0 - params.q);
  return static_cast<double>(params.n_countries) * std::pow(ratio, na);
}

// d k_c1 / d k_c0, negative for q < 1 and r < 1:
//   -(N_p N_c / k_c0^2) (1-q)(1-r) (r (k_c0/N_p)^(1/N_a) + (1-q)(1-r))^(N_a-1)
inline double k_c1_slope(const BinomialParams& params, double k_c0) {
  params.validate();
  if (!(k_c0 > 0.0 && k_c0 <= static_cast<double>(params.n_products)))
    throw validation_error("k_c1_slope: k_c0 must be in (0, N_p]");
  const double na = static_cast<double>(params.n_capabilities);
  const double np = static_cast<double>(params.n_products);
  const double base = params.r * std::pow(k_c0 / np, 1.0 / na) + (1.0 - params.q) * (1.0 - params.r);
  return -(np * static_cast<double>(params.n_countries) / (k_c0 * k_c0)) * (1.0 - params.q) *
         (1.0 - params.r) * std::pow(base, na - 1.0);
}

// Numerically normalized density on a uniform support grid. The analytic
// forms are known only up to a constant, so the normalization is trapezoidal
// quadrature over `x`.
struct DensityCurve {
  std::vector<double> x;
  std::vector<double> pdf;  // normalized
  std::vector<double> cdf;  // normalized, cdf.front() == 0, cdf.back() == 1
  double normalization = 0.0;
  double support_lo = 0.0;
  double support_hi = 1.0;

  double cdf_at(double value) const {
    if (value <= x.front()) return 0.0;
    if (value >= x.back()) return 1.0;
    const auto it = std::upper_bound(x.begin(), x.end(), value);
    const std::size_t hi = static_cast<std::size_t>(it - x.begin());
    const std::size_t lo = hi - 1;
    const double t = (value - x[lo]) / (x[hi] - x[lo]);
    return cdf[lo] + t * (cdf[hi] - cdf[lo]);
  }
};

namespace detail {

template <typename LogDensity>
DensityCurve normalized_curve(double lo, double hi, std::size_t points, LogDensity&& log_density) {
  if (points < 2) throw validation_error("density grid needs at least 2 points");
  DensityCurve curve;
  curve.support_lo = lo;
  curve.support_hi = hi;
  curve.x.resize(points);
  curve.pdf.resize(points);
  curve.cdf.resize(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    curve.x[i] = (i + 1 == points) ? hi : lo + step * static_cast<double>(i);
    curve.pdf[i] = std::exp(log_density(curve.x[i]));
  }
  double cum = 0.0;
  curve.cdf[0] = 0.0;
  for (std::size_t i = 1; i < points; ++i) {
    cum += 0.5 * (curve.pdf[i] + curve.pdf[i - 1]) * (curve.x[i] - curve.x[i - 1]);
    curve.cdf[i] = cum;
  }
  if (!(cum > 0.0)) throw error("density normalization failed: zero mass on support grid");
  curve.normalization = cum;
  for (std::size_t i = 0; i < points; ++i) {
    curve.pdf[i] /= cum;
    curve.cdf[i] /= cum;
  }
  return curve;
}

}  // namespace detail

// Distribution of the fraction of products exported by a country,
// u = k_c0 / N_p, on the support ((1-q)^N_a, 1]. The binomial coefficient is
// generalized through log-gamma because the implied capability count is
// real-valued; everything is evaluated in log space.
inline double diversification_log_density_unnormalized(const BinomialParams& params, double u) {
  params.validate();
  const double na = static_cast<double>(params.n_capabilities);
  const double lo = std::pow(1.0 - params.q, na);
  if (!(u >= lo && u <= 1.0))
    throw validation_error("diversification density: u outside support ((1-q)^N_a, 1]");
  double w = (na / params.q) * (std::pow(u, 1.0 / na) + params.q - 1.0);
  w = std::clamp(w, 0.0, na);
  return std::log(static_cast<double>(params.n_products) / (params.q * u)) +
         detail::log_binomial_coefficient(na, w) + w * std::log(params.r) +
         (na - w) * std::log1p(-params.r);
}

inline double diversification_density_unnormalized(const BinomialParams& params, double u) {
  return std::exp(diversification_log_density_unnormalized(params, u));
}

inline DensityCurve diversification_pdf(const BinomialParams& params, std::size_t points = 10000) {
  params.validate();
  const double lo = std::pow(1.0 - params.q, static_cast<double>(params.n_capabilities));
  return detail::normalized_curve(lo, 1.0, points, [&](double u) {
    return diversification_log_density_unnormalized(params, u);
  });
}

// Distribution of the fraction of countries exporting a product,
// v = k_p0 / N_c, on the support (r^N_a, 1]. The 1/(v log r) Jacobian is
// negative on the support; its magnitude is used and the sign is absorbed by
// the normalization.
inline double ubiquity_log_density_unnormalized(const BinomialParams& params, double v) {
  params.validate();
  const double na = static_cast<double>(params.n_capabilities);
  const double lo = std::pow(params.r, na);
  if (!(v >= lo && v <= 1.0))
    throw validation_error("ubiquity density: v outside support (r^N_a, 1]");
  double y = std::log(v) / std::log(params.r);
  y = std::clamp(y, 0.0, na);
  return std::log(static_cast<double>(params.n_countries) /
                  (v * std::abs(std::log(params.r)))) +
         detail::log_binomial_coefficient(na, y) + y * std::log(params.q) +
         (na - y) * std::log1p(-params.q);
}

inline double ubiquity_density_unnormalized(const BinomialParams& params, double v) {
  return std::exp(ubiquity_log_density_unnormalized(params, v));
}

inline DensityCurve ubiquity_pdf(const BinomialParams& params, std::size_t points = 10000) {
  params.validate();
  const double lo = std::pow(params.r, static_cast<double>(params.n_capabilities));
  return detail::normalized_curve(lo, 1.0, points, [&](double v) {
    return ubiquity_log_density_unnormalized(params, v);
  });
}

// (capability fraction, product fraction) pairs along a capability grid; the
// convex shape of this curve is the quiescence-trap statement.
inline std::vector<std::pair<double, double>> quiescence_curve(const BinomialParams& params,
                                                               std::span<const double> k_ca_grid) {
  params.validate();
  std::vector<std::pair<double, double>> curve;
  curve.reserve(k_ca_grid.size());
  const double na = static_cast<double>(params.n_capabilities);
  const double np = static_cast<double>(params.n_products);
  for (double k : k_ca_grid) {
    detail::require_capability_range(k, params.n_capabilities, "quiescence_curve");
    curve.emplace_back(k / na, expected_diversification(params, k) / np);
  }
  return curve;
}

// Analytic derivatives against central finite differences, plus the signs the
// model claims: the diversification slope is nonnegative, the k_c1 slope
// nonpositive, and both histogram-form derivatives strictly positive.
struct DerivativeChecks {
  double max_rel_err_eq_diversification_slope = 0.0;  // closed-form slope vs FD
  double max_rel_err_eq_k_c1_slope = 0.0;             // k_c1 slope vs FD
  double max_rel_err_hist_d1 = 0.0;                   // histogram first derivative vs FD
  double max_rel_err_hist_d2 = 0.0;                   // histogram second derivative vs FD of d1
  bool sign_ok_diversification_slope = true;          // >= 0
  bool sign_ok_k_c1_slope = true;                     // <= 0
  bool sign_ok_hist_d1 = true;                        // > 0
  bool sign_ok_hist_d2 = true;                        // > 0
  // worst gap of the r^k_pa shortcut against the exact binomial average of
  // (k/N_a)^k_pa; reported, not asserted
  double ubiquity_approx_max_abs_err = 0.0;

  bool all_within(double tol) const {
    return max_rel_err_eq_diversification_slope < tol && max_rel_err_eq_k_c1_slope < tol &&
           max_rel_err_hist_d1 < tol && max_rel_err_hist_d2 < tol;
  }
  bool all_signs_ok() const {
    return sign_ok_diversification_slope && sign_ok_k_c1_slope && sign_ok_hist_d1 &&
           sign_ok_hist_d2;
  }
};

inline DerivativeChecks derivative_checks(const BinomialParams& params,
                                          const RequirementHistogram* hist = nullptr,
                                          std::size_t grid_points = 20, double step = 1e-5) {
  params.validate();
  RequirementHistogram default_hist;
  if (!hist) {
    default_hist = binomial_requirement_histogram(params);
    hist = &default_hist;
  }
  DerivativeChecks checks;
  const double na = static_cast<double>(params.n_capabilities);
  const double np = static_cast<double>(params.n_products);
  auto rel_err = [](double analytic, double fd) {
    return std::abs(analytic - fd) / (1.0 + std::abs(analytic));
  };
  auto grid = [&](double lo, double hi) {
    std::vector<double> g(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i)
      g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    return g;
  };

  for (double k : grid(0.025 * na, 0.975 * na)) {
    const double analytic = diversification_slope(params, k);
    const double fd = (expected_diversification(params, k + step) -
                       expected_diversification(params, k - step)) /
                      (2.0 * step);
    checks.max_rel_err_eq_diversification_slope =
        std::max(checks.max_rel_err_eq_diversification_slope, rel_err(analytic, fd));
    if (analytic < 0.0) checks.sign_ok_diversification_slope = false;

    const double d1 = mean_field_diversity_d1(*hist, k, params.n_capabilities);
    const double d1_fd = (mean_field_diversity(*hist, k + step, params.n_capabilities) -
                          mean_field_diversity(*hist, k - step, params.n_capabilities)) /
                         (2.0 * step);
    checks.max_rel_err_hist_d1 = std::max(checks.max_rel_err_hist_d1, rel_err(d1, d1_fd));
    if (!(d1 > 0.0)) checks.sign_ok_hist_d1 = false;

    const double d2 = mean_field_diversity_d2(*hist, k, params.n_capabilities);
    const double d2_fd = (mean_field_diversity_d1(*hist, k + step, params.n_capabilities) -
                          mean_field_diversity_d1(*hist, k - step, params.n_capabilities)) /
                         (2.0 * step);
    checks.max_rel_err_hist_d2 = std::max(checks.max_rel_err_hist_d2, rel_err(d2, d2_fd));
    if (!(d2 > 0.0)) checks.sign_ok_hist_d2 = false;
  }

  for (double k0 : grid(0.05 * np, 0.95 * np)) {
    const double analytic = k_c1_slope(params, k0);
    const double fd =
        (expected_k_c1(params, k0 + step) - expected_k_c1(params, k0 - step)) / (2.0 * step);
    checks.max_rel_err_eq_k_c1_slope =
        std::max(checks.max_rel_err_eq_k_c1_slope, rel_err(analytic, fd));
    if (analytic > 0.0) checks.sign_ok_k_c1_slope = false;
  }

  // quantify the mean-field shortcut pi = r^x against the exact average of
  // (K/N_a)^x over K ~ Binomial(N_a, r)
  for (std::size_t x = 0; x <= params.n_capabilities; ++x) {
    double exact = 0.0;
    for (std::size_t k = 0; k <= params.n_capabilities; ++k)
      exact += detail::binomial_pmf(params.n_capabilities, params.r, k) *
               std::pow(static_cast<double>(k) / na, static_cast<double>(x));
    const double approx = std::pow(params.r, static_cast<double>(x));
    checks.ubiquity_approx_max_abs_err =
        std::max(checks.ubiquity_approx_max_abs_err, std::abs(exact - approx));
  }
  return checks;
}

}  // namespace capnet
