#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "capnet/error.hpp"
#include "capnet/stats.hpp"

namespace capnet {

struct Sample {
  std::vector<double> values;
  bool positives_only = false;  // zeros/negatives were stripped before fitting
};

inline Sample make_sample(std::vector<double> values, bool positives_only = false) {
  for (double v : values)
    if (!std::isfinite(v)) throw validation_error("Sample: values must be finite");
  return Sample{std::move(values), positives_only};
}

struct PositiveSubsample {
  Sample sample;
  std::size_t excluded = 0;
};

// Strips zeros and negatives; the count is reported so the exclusion stays
// auditable downstream.
inline PositiveSubsample positive_subsample(const Sample& s) {
  PositiveSubsample out;
  out.sample.positives_only = true;
  out.sample.values.reserve(s.values.size());
  for (double v : s.values) {
    if (v > 0.0) {
      out.sample.values.push_back(v);
    } else {
      ++out.excluded;
    }
  }
  return out;
}

enum class Family { Normal, LogNormal, Weibull };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::Normal: return "normal";
    case Family::LogNormal: return "lognormal";
    case Family::Weibull: return "weibull";
  }
  return "?";
}

// Fitted family. Parameter meaning per family:
//   Normal:    p1 = mean, p2 = sd (MLE, 1/n)
//   LogNormal: p1 = log-mean, p2 = log-sd
//   Weibull:   p1 = scale lambda, p2 = shape k
struct FitResult {
  Family family = Family::Normal;
  double p1 = 0.0;
  double p2 = 0.0;
  double log_likelihood = 0.0;
  double ks_stat = 0.0;  // one-sample KS against the fitted CDF
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;
};

inline double normal_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}
inline double normal_cdf(double x, double mu, double sd) {
  return 0.5 * std::erfc(-(x - mu) / (sd * std::numbers::sqrt2));
}
inline double lognormal_pdf(double x, double log_mu, double log_sd) {
  if (x <= 0.0) return 0.0;
  return normal_pdf(std::log(x), log_mu, log_sd) / x;
}
inline double lognormal_cdf(double x, double log_mu, double log_sd) {
  if (x <= 0.0) return 0.0;
  return normal_cdf(std::log(x), log_mu, log_sd);
}
inline double weibull_pdf(double x, double scale, double shape) {
  if (x <= 0.0) return 0.0;
  const double y = x / scale;
  return (shape / scale) * std::pow(y, shape - 1.0) * std::exp(-std::pow(y, shape));
}
inline double weibull_cdf(double x, double scale, double shape) {
  if (x <= 0.0) return 0.0;
  return -std::expm1(-std::pow(x / scale, shape));
}

inline std::function<double(double)> fitted_cdf(const FitResult& fit) {
  switch (fit.family) {
    case Family::Normal:
      return [=](double x) { return normal_cdf(x, fit.p1, fit.p2); };
    case Family::LogNormal:
      return [=](double x) { return lognormal_cdf(x, fit.p1, fit.p2); };
    case Family::Weibull:
      return [=](double x) { return weibull_cdf(x, fit.p1, fit.p2); };
  }
  throw validation_error("fitted_cdf: unknown family");
}

// Sup distance between the empirical CDF and a model CDF, exact via step-point
// enumeration. The optional weighted mode divides each gap by sqrt(F(1-F))
// with F clipped to [1/(2n), 1 - 1/(2n)].
inline double ks_statistic(const Sample& s, const std::function<double(double)>& cdf,
                           bool weighted = false) {
  if (s.values.empty()) throw validation_error("ks_statistic: empty sample");
  std::vector<double> sorted = s.values;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double clip = 1.0 / (2.0 * n);
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    double gap = std::max(std::abs(static_cast<double>(i + 1) / n - f),
                          std::abs(static_cast<double>(i) / n - f));
    if (weighted) {
      const double fc = std::clamp(f, clip, 1.0 - clip);
      gap /= std::sqrt(fc * (1.0 - fc));
    }
    d = std::max(d, gap);
  }
  return d;
}

// Two-sample form; symmetric. Weighted mode uses the pooled empirical CDF as
// the reference F, clipped to [1/(2 min(n,m)), 1 - 1/(2 min(n,m))].
inline double ks_statistic(const Sample& a, const Sample& b, bool weighted = false) {
  if (a.values.empty() || b.values.empty()) throw validation_error("ks_statistic: empty sample");
  std::vector<double> sa = a.values, sb = b.values;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double n = static_cast<double>(sa.size());
  const double m = static_cast<double>(sb.size());
  const double clip = 1.0 / (2.0 * std::min(n, m));
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() || j < sb.size()) {
    double v;
    if (i < sa.size() && (j >= sb.size() || sa[i] <= sb[j])) {
      v = sa[i];
    } else {
      v = sb[j];
    }
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    const double f1 = static_cast<double>(i) / n;
    const double f2 = static_cast<double>(j) / m;
    double gap = std::abs(f1 - f2);
    if (weighted) {
      const double fp = std::clamp((static_cast<double>(i) + static_cast<double>(j)) / (n + m),
                                   clip, 1.0 - clip);
      gap /= std::sqrt(fp * (1.0 - fp));
    }
    d = std::max(d, gap);
  }
  return d;
}

namespace detail {

inline void require_fit_size(const Sample& s, const char* who) {
  if (s.values.size() < 2)
    throw validation_error(std::string(who) + ": need at least 2 values, got " +
                           std::to_string(s.values.size()));
}

// variance is treated as zero when it vanishes relative to the magnitude of
// the values (all-equal samples up to rounding)
inline bool degenerate_variance(double var, double m) {
  return var <= 1e-20 * std::max(1.0, m * m);
}

}  // namespace detail

inline FitResult fit_normal(const Sample& s) {
  detail::require_fit_size(s, "fit_normal");
  const double mu = mean(s.values);
  const double var = variance_mle(s.values);
  if (detail::degenerate_variance(var, mu))
    throw error("fit_normal: zero variance (all values equal)");
  const double sd = std::sqrt(var);
  const double n = static_cast<double>(s.values.size());
  FitResult fit;
  fit.family = Family::Normal;
  fit.p1 = mu;
  fit.p2 = sd;
  // at the MLE the quadratic term sums to n/2 exactly
  fit.log_likelihood = -0.5 * n * (std::log(2.0 * std::numbers::pi * var) + 1.0);
  fit.n_used = s.values.size();
  fit.ks_stat = ks_statistic(s, fitted_cdf(fit));
  return fit;
}

inline FitResult fit_lognormal(const Sample& s) {
  auto [positives, excluded] = positive_subsample(s);
  if (positives.values.size() < 2)
    throw validation_error("fit_lognormal: fewer than 2 positive values (" +
                           std::to_string(excluded) + " excluded)");
  std::vector<double> logs(positives.values.size());
  std::transform(positives.values.begin(), positives.values.end(), logs.begin(),
                 [](double v) { return std::log(v); });
  const double mu = mean(logs);
  const double var = variance_mle(logs);
  if (detail::degenerate_variance(var, mu))
    throw error("fit_lognormal: zero variance of log-values");
  const double sd = std::sqrt(var);
  const double n = static_cast<double>(logs.size());
  double sum_logs = 0.0;
  for (double lx : logs) sum_logs += lx;
  FitResult fit;
  fit.family = Family::LogNormal;
  fit.p1 = mu;
  fit.p2 = sd;
  fit.log_likelihood = -0.5 * n * (std::log(2.0 * std::numbers::pi * var) + 1.0) - sum_logs;
  fit.n_used = positives.values.size();
  fit.n_excluded = excluded;
  fit.ks_stat = ks_statistic(positives, fitted_cdf(fit));
  return fit;
}

// Two-parameter Weibull MLE. The shape solves
//   sum x^k ln x / sum x^k - 1/k = mean(ln x)
// by safeguarded Newton with a bisection fallback on k in [1e-3, 1e3]; the
// scale follows as lambda = (sum x^k / n)^(1/k). Values are rescaled by the
// sample maximum so x^k stays bounded at large shapes.
inline FitResult fit_weibull(const Sample& s) {
  auto [positives, excluded] = positive_subsample(s);
  if (positives.values.size() < 2)
    throw validation_error("fit_weibull: fewer than 2 positive values (" +
                           std::to_string(excluded) + " excluded)");
  const auto& x = positives.values;
  const double n = static_cast<double>(x.size());
  const double x_max = *std::max_element(x.begin(), x.end());
  std::vector<double> log_y(x.size());
  double mean_log_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    log_y[i] = std::log(x[i] / x_max);
    mean_log_y += log_y[i];
  }
  mean_log_y /= n;

  struct Eval {
    double g, dg, t0;
  };
  auto eval = [&](double k) {
    double t0 = 0.0, t1 = 0.0, t2 = 0.0;
    for (double ly : log_y) {
      const double w = std::exp(k * ly);
      t0 += w;
      t1 += w * ly;
      t2 += w * ly * ly;
    }
    Eval e;
    e.g = t1 / t0 - 1.0 / k - mean_log_y;
    e.dg = (t2 * t0 - t1 * t1) / (t0 * t0) + 1.0 / (k * k);
    e.t0 = t0;
    return e;
  };

  double lo = 1e-3, hi = 1e3;
  if (eval(hi).g <= 0.0)
    throw error("fit_weibull: degenerate sample (no root for the shape equation; shape -> inf)");
  double k = 1.0;
  Eval e = eval(k);
  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(e.g) < 1e-10) {
      converged = true;
      break;
    }
    if (e.g > 0.0) {
      hi = k;
    } else {
      lo = k;
    }
    double next = k - e.g / e.dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == k) {
      converged = true;
      break;
    }
    k = next;
    e = eval(k);
  }
  if (!converged && std::abs(e.g) >= 1e-8)
    throw error("fit_weibull: no convergence after 200 iterations");

  const double scale = x_max * std::pow(e.t0 / n, 1.0 / k);
  FitResult fit;
  fit.family = Family::Weibull;
  fit.p1 = scale;
  fit.p2 = k;
  double sum_log_x = 0.0;
  for (double v : x) sum_log_x += std::log(v);
  // sum (x/lambda)^k equals n at the MLE scale
  fit.log_likelihood = n * std::log(k) - n * k * std::log(scale) + (k - 1.0) * sum_log_x - n;
  fit.n_used = x.size();
  fit.n_excluded = excluded;
  fit.ks_stat = ks_statistic(positives, fitted_cdf(fit));
  return fit;
}

inline FitResult fit_family(Family family, const Sample& s) {
  switch (family) {
    case Family::Normal: return fit_normal(s);
    case Family::LogNormal: return fit_lognormal(s);
    case Family::Weibull: return fit_weibull(s);
  }
  throw validation_error("fit_family: unknown family");
}

struct FamilyRanking {
  std::vector<FitResult> ranked;  // by descending log-likelihood
  std::vector<std::pair<Family, std::string>> failures;
  std::size_t excluded = 0;  // dropped to form the common positive sub-sample
};

// Fits all requested families on the common positive sub-sample so the
// likelihoods are comparable, ranks by log-likelihood, and reports failed
// fits instead of dropping them silently.
inline FamilyRanking rank_families(const Sample& s,
                                   std::vector<Family> families = {Family::Normal,
                                                                   Family::LogNormal,
                                                                   Family::Weibull}) {
  auto [positives, excluded] = positive_subsample(s);
  FamilyRanking ranking;
  ranking.excluded = excluded;
  for (Family family : families) {
    try {
      ranking.ranked.push_back(fit_family(family, positives));
    } catch (const error& e) {
      ranking.failures.emplace_back(family, e.what());
    }
  }
  if (ranking.ranked.empty()) throw error("rank_families: all fits failed");
  std::stable_sort(ranking.ranked.begin(), ranking.ranked.end(),
                   [](const FitResult& a, const FitResult& b) {
                     return a.log_likelihood > b.log_likelihood;
                   });
  return ranking;
}

}  // namespace capnet
