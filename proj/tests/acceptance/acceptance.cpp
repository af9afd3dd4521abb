// Acceptance suite. Each criterion prints one [PASS]/[FAIL] line plus the
// measured numbers it was judged on; the exit code is the number of failed
// criteria. Run with no arguments for all criteria or with a list of
// criterion numbers.

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "capnet/capnet.hpp"

namespace fs = std::filesystem;
using namespace capnet;

namespace {

struct Check {
  std::string detail;
  bool pass;
};

struct Criterion {
  int id = 0;
  std::string title;
  std::vector<Check> checks{};

  void check(bool pass, const std::string& detail) { checks.push_back({detail, pass}); }
  bool passed() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
};

std::string num(double v) { return format_double(v); }

// calibrated parameter rows: label, N_a, r, q, N_c, N_p, and the reference
// ubiquity-KS magnitude each row is compared against
struct CalibratedRow {
  const char* label;
  std::size_t na;
  double r;
  double q;
  std::size_t nc;
  std::size_t np;
  double reference_ks_ubiquity;
};
const std::vector<CalibratedRow> kCalibratedRows = {
    {"SITC-4 R*=0.5", 65, 0.86, 0.1661, 129, 772, 0.0849},
    {"SITC-4 R*=1", 80, 0.87, 0.1795, 129, 772, 0.1189},
    {"HS-6 R*=0.5", 70, 0.89, 0.2542, 232, 5109, 0.1035},
    {"HS-6 R*=1", 70, 0.89, 0.3016, 232, 5109, 0.1084},
};

// ---------------------------------------------------------------------------

Criterion criterion_1() {
  Criterion c{1, "density constraint reproduces the calibrated q values"};
  struct Case {
    double eta;
    std::size_t na;
    double r;
    double expected;
  };
  for (const Case& k : {Case{0.1353, 80, 0.87, 0.1795}, Case{0.1962, 65, 0.86, 0.1661},
                        Case{0.0854, 70, 0.89, 0.3016}, Case{0.1257, 70, 0.89, 0.2542}}) {
    const QFromDensity qd = q_from_density(k.eta, k.r, k.na);
    const bool ok = qd.feasible && std::abs(qd.q - k.expected) <= 1e-3;
    c.check(ok, "q(eta=" + num(k.eta) + ", r=" + num(k.r) + ", Na=" + std::to_string(k.na) +
                    ") = " + num(qd.q) + ", expected " + num(k.expected) + " (tol 1e-3)");
  }
  return c;
}

Criterion criterion_2() {
  Criterion c{2, "simulated ubiquity/diversification KS against the analytic densities"};
  const std::size_t seeds = 20;
  for (std::size_t row = 0; row < kCalibratedRows.size(); ++row) {
    const CalibratedRow& t = kCalibratedRows[row];
    const BinomialParams params{t.r, t.q, t.na, t.nc, t.np};
    const DensityCurve ub_curve = ubiquity_pdf(params);
    const DensityCurve div_curve = diversification_pdf(params);
    double ks_ub = 0.0, ks_div = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) {
      const BipartiteNetwork net =
          leontief(sample_world(params, derive_seed(0xC2 + row, s)));
      const DegreeProfile profile = degree_profile(net);
      std::vector<double> v(profile.k_p0.size()), u(profile.k_c0.size());
      for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = static_cast<double>(profile.k_p0[j]) / static_cast<double>(t.nc);
      for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = static_cast<double>(profile.k_c0[i]) / static_cast<double>(t.np);
      ks_ub += ks_statistic(make_sample(v), [&](double x) { return ub_curve.cdf_at(x); });
      ks_div += ks_statistic(make_sample(u), [&](double x) { return div_curve.cdf_at(x); });
    }
    ks_ub /= static_cast<double>(seeds);
    ks_div /= static_cast<double>(seeds);
    c.check(std::abs(ks_ub - t.reference_ks_ubiquity) <= 0.05,
            std::string(t.label) + ": mean ubiquity KS " + num(ks_ub) + ", reported " +
                num(t.reference_ks_ubiquity) + " (tol 0.05)");
    c.check(ks_div > 0.25, std::string(t.label) + ": mean diversification KS " + num(ks_div) +
                               ", required > 0.25");
  }
  return c;
}

Criterion criterion_3() {
  Criterion c{3, "full-pipeline planted-parameter recovery, 10 trials"};
  const BinomialParams planted{0.90, 0.25, 40, 100, 500};
  const CalibrationAxes axes = make_axes(0.72, 0.96, 0.06, 10, 130, 30);
  const double r_step = 0.06;
  const double na_step = 30.0;
  int hits = 0;
  std::ostringstream detail;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const SyntheticTrade synth = make_synthetic_trade(planted, derive_seed(0xC3, trial));
    const ExportTable table = aggregate(synth.records);
    const RcaMatrix rca = compute_rca(table);
    const BipartiteNetwork net = threshold(rca, synth.safe_threshold);
    if (!(net.adjacency == synth.planted.adjacency)) {
      detail << " trial" << trial << ":reconstruction-mismatch";
      continue;
    }
    const DegreeProfile profile = degree_profile(net);
    const auto diagram_points = diagram(profile, DiagramSide::Country);
    const Sample phi = make_sample(proximity_sample(net));
    try {
      const CalibrationGrid r2_layer = fit_kc0_kc1_grid(
          diagram_points, density(net), axes, net.country_count(), net.product_count());
      const CalibrationGrid ks_layer =
          proximity_ks_grid(phi, net.country_count(), net.product_count(), density(net), axes, 5,
                            derive_seed(0xC31, trial));
      const CalibrationResult result = intersect(r2_layer, ks_layer, 0.10, 0.50);
      const bool hit =
          std::abs(result.chosen.r - planted.r) <= r_step + 1e-9 &&
          std::abs(static_cast<double>(result.chosen.n_capabilities) -
                   static_cast<double>(planted.n_capabilities)) <= na_step + 1e-9;
      hits += hit ? 1 : 0;
      detail << " trial" << trial << ":(r=" << num(result.chosen.r)
             << ",na=" << result.chosen.n_capabilities << (hit ? ")+" : ")-");
    } catch (const error& e) {
      detail << " trial" << trial << ":empty-intersection";
    }
  }
  c.check(hits >= 9, "planted (r=0.9, Na=40, q=0.25) at 100x500, 5 seeds/cell; recovered within "
                     "one grid step in " +
                         std::to_string(hits) + "/10 trials (need >= 9):" + detail.str());
  return c;
}

Criterion criterion_4() {
  Criterion c{4, "oracle equivalences are exact"};
  Rng rng(0xC4);
  {
    bool all_equal = true;
    for (int rep = 0; rep < 1000 && all_equal; ++rep) {
      const BinomialParams params{0.2 + 0.6 * rng.next_double(), 0.2 + 0.6 * rng.next_double(),
                                  1 + rng.below(8), 1 + rng.below(8), 1 + rng.below(8)};
      const CapabilityWorld world = sample_world(params, rng.next_u64());
      const BipartiteNetwork net = leontief(world);
      for (std::size_t i = 0; i < params.n_countries && all_equal; ++i)
        for (std::size_t p = 0; p < params.n_products; ++p) {
          bool subset = true;
          for (std::size_t a = 0; a < params.n_capabilities; ++a)
            if (world.product_reqs.test(p, a) && !world.country_caps.test(i, a)) subset = false;
          if (net.adjacency.test(i, p) != subset) {
            all_equal = false;
            break;
          }
        }
    }
    c.check(all_equal, "subset operator vs brute-force subset test: 1000 random worlds, dims <= 8");
  }
  {
    bool all_equal = true;
    for (int rep = 0; rep < 1000 && all_equal; ++rep) {
      BipartiteNetwork net;
      net.adjacency = BitMatrix(10, 10);
      const double p = 0.15 + 0.7 * rng.next_double();
      for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j)
          if (rng.bernoulli(p)) net.adjacency.set(i, j);
      const ProximityMatrix prox = proximity(net);
      std::vector<std::size_t> ubiquity(10, 0);
      for (std::size_t j = 0; j < 10; ++j)
        for (std::size_t i = 0; i < 10; ++i)
          if (net.adjacency.test(i, j)) ++ubiquity[j];
      for (std::size_t a = 0; a < 10 && all_equal; ++a)
        for (std::size_t b = a + 1; b < 10; ++b) {
          std::size_t co = 0;
          for (std::size_t i = 0; i < 10; ++i)
            if (net.adjacency.test(i, a) && net.adjacency.test(i, b)) ++co;
          const std::size_t larger = std::max(ubiquity[a], ubiquity[b]);
          const double expected =
              larger == 0 ? 0.0 : static_cast<double>(co) / static_cast<double>(larger);
          if (prox.phi(a, b) != expected) {
            all_equal = false;
            break;
          }
        }
    }
    c.check(all_equal, "proximity vs double-loop oracle: 1000 random 10x10 matrices");
  }
  {
    bool all_preserved = true;
    for (int rep = 0; rep < 1000 && all_preserved; ++rep) {
      BipartiteNetwork net;
      const std::size_t nc = 4 + rng.below(12), np = 4 + rng.below(12);
      net.adjacency = BitMatrix(nc, np);
      const double p = 0.15 + 0.7 * rng.next_double();
      for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < np; ++j)
          if (rng.bernoulli(p)) net.adjacency.set(i, j);
      const SwapResult result = null4(net, rng.next_u64(), 20);
      for (std::size_t i = 0; i < nc; ++i)
        if (result.network.adjacency.ones_in_row(i) != net.adjacency.ones_in_row(i))
          all_preserved = false;
      for (std::size_t j = 0; j < np; ++j) {
        std::size_t before = 0, after = 0;
        for (std::size_t i = 0; i < nc; ++i) {
          before += net.adjacency.test(i, j) ? 1 : 0;
          after += result.network.adjacency.test(i, j) ? 1 : 0;
        }
        if (before != after) all_preserved = false;
      }
    }
    c.check(all_preserved, "degree-preserving swaps keep both degree sequences: 1000 matrices");
  }
  return c;
}

Criterion criterion_5() {
  Criterion c{5, "mean-field agreement per capability/requirement bin"};
  // dilute regime: the with-replacement approximation of the subset
  // probability holds to well under 2% here
  const BinomialParams params{0.8, 0.04, 25, 200, 1000};
  const std::size_t seeds = 500;
  std::vector<double> div_sum(26, 0.0), div_n(26, 0.0), ub_sum(26, 0.0), ub_n(26, 0.0);
  for (std::size_t s = 0; s < seeds; ++s) {
    const CapabilityWorld world = sample_world(params, derive_seed(0xC5, s));
    const BipartiteNetwork net = leontief(world);
    const DegreeProfile profile = degree_profile(net);
    for (std::size_t i = 0; i < 200; ++i) {
      div_sum[world.caps_per_country[i]] += static_cast<double>(profile.k_c0[i]);
      div_n[world.caps_per_country[i]] += 1.0;
    }
    for (std::size_t j = 0; j < 1000; ++j) {
      ub_sum[world.reqs_per_product[j]] += static_cast<double>(profile.k_p0[j]);
      ub_n[world.reqs_per_product[j]] += 1.0;
    }
  }
  double worst_div = 0.0, worst_ub = 0.0;
  std::size_t div_bins = 0, ub_bins = 0;
  for (std::size_t k = 0; k <= 25; ++k) {
    if (div_n[k] >= 20.0) {
      ++div_bins;
      const double rel = std::abs(div_sum[k] / div_n[k] /
                                      expected_diversification(params, static_cast<double>(k)) -
                                  1.0);
      worst_div = std::max(worst_div, rel);
    }
    if (ub_n[k] >= 20.0) {
      ++ub_bins;
      const double rel = std::abs(
          ub_sum[k] / ub_n[k] / expected_ubiquity(params, static_cast<double>(k)) - 1.0);
      worst_ub = std::max(worst_ub, rel);
    }
  }
  c.check(worst_div <= 0.02 && div_bins > 0,
          "diversification per capability bin: worst relative gap " + num(worst_div) + " over " +
              std::to_string(div_bins) + " bins (tol 0.02, bins >= 20 members, 500 seeds)");
  c.check(worst_ub <= 0.02 && ub_bins > 0,
          "ubiquity per requirement bin: worst relative gap " + num(worst_ub) + " over " +
              std::to_string(ub_bins) + " bins (tol 0.02)");
  return c;
}

Criterion criterion_6() {
  Criterion c{6, "analytic derivatives match finite differences and carry their signs"};
  for (const CalibratedRow& t : kCalibratedRows) {
    const BinomialParams params{t.r, t.q, t.na, t.nc, t.np};
    const DerivativeChecks checks = derivative_checks(params);
    const double worst =
        std::max({checks.max_rel_err_eq_diversification_slope, checks.max_rel_err_eq_k_c1_slope,
                  checks.max_rel_err_hist_d1, checks.max_rel_err_hist_d2});
    c.check(checks.all_within(1e-6) && checks.all_signs_ok(),
            std::string(t.label) + ": worst relative error " + num(worst) +
                " (tol 1e-6), signs " + (checks.all_signs_ok() ? "ok" : "violated"));
  }
  return c;
}

Criterion criterion_7() {
  Criterion c{7, "maximum-likelihood recovery of planted distribution parameters"};
  Rng rng(0xC7);
  auto draw_normal = [&](std::size_t n, double mu, double sd) {
    std::vector<double> v(n);
    for (auto& x : v) x = mu + sd * rng.normal();
    return v;
  };
  auto within = [](double value, double target) {
    return std::abs(value - target) <= 0.05 * std::abs(target);
  };
  {
    const FitResult fit = fit_normal(make_sample(draw_normal(10000, 3.0, 2.0)));
    c.check(within(fit.p1, 3.0) && within(fit.p2, 2.0),
            "normal(3, 2): recovered (" + num(fit.p1) + ", " + num(fit.p2) + ") (tol 5%)");
  }
  {
    std::vector<double> v = draw_normal(10000, 0.7, 0.5);
    for (auto& x : v) x = std::exp(x);
    const FitResult fit = fit_lognormal(make_sample(v));
    c.check(within(fit.p1, 0.7) && within(fit.p2, 0.5),
            "lognormal(0.7, 0.5): recovered (" + num(fit.p1) + ", " + num(fit.p2) + ") (tol 5%)");
  }
  {
    std::vector<double> v(10000);
    for (auto& x : v) x = 2.0 * std::pow(-std::log1p(-rng.next_double()), 1.0 / 1.5);
    const FitResult fit = fit_weibull(make_sample(v));
    c.check(within(fit.p1, 2.0) && within(fit.p2, 1.5),
            "weibull(scale 2, shape 1.5): recovered (" + num(fit.p1) + ", " + num(fit.p2) +
                ") (tol 5%)");
  }
  {
    std::vector<double> log_data = draw_normal(10000, 0.0, 0.7);
    for (auto& x : log_data) x = std::exp(x);
    const bool ln_first =
        rank_families(make_sample(log_data)).ranked.front().family == Family::LogNormal;
    std::vector<double> wb_data(10000);
    for (auto& x : wb_data) x = std::pow(-std::log1p(-rng.next_double()), 1.0 / 1.2);
    const bool wb_first =
        rank_families(make_sample(wb_data)).ranked.front().family == Family::Weibull;
    const bool n_first =
        rank_families(make_sample(draw_normal(10000, 10.0, 1.0))).ranked.front().family ==
        Family::Normal;
    c.check(ln_first && wb_first && n_first,
            std::string("generating family ranked first: lognormal=") + (ln_first ? "y" : "n") +
                " weibull=" + (wb_first ? "y" : "n") + " normal=" + (n_first ? "y" : "n"));
  }
  return c;
}

Criterion criterion_8() {
  Criterion c{8, "stylized-fact battery on simulated worlds at the calibrated parameters"};
  std::uint64_t seed = 0xC8;
  for (const CalibratedRow& t : kCalibratedRows) {
    const BinomialParams params{t.r, t.q, t.na, t.nc, t.np};
    const BipartiteNetwork net = leontief(sample_world(params, seed++));
    const DegreeProfile profile = degree_profile(net);
    std::vector<double> k0, k1, kp0, kc0;
    for (std::size_t i = 0; i < profile.k_c0.size(); ++i) {
      kc0.push_back(static_cast<double>(profile.k_c0[i]));
      if (profile.k_c1[i]) {
        k0.push_back(static_cast<double>(profile.k_c0[i]));
        k1.push_back(*profile.k_c1[i]);
      }
    }
    for (std::size_t j = 0; j < profile.k_p0.size(); ++j)
      kp0.push_back(static_cast<double>(profile.k_p0[j]));
    const double rho = spearman_rho(k0, k1);
    c.check(rho < 0.0, std::string(t.label) + ": Spearman(k_c0, k_c1) = " + num(rho) + " < 0");

    const auto div_ranking = rank_families(make_sample(kc0));
    const auto ub_ranking = rank_families(make_sample(kp0));
    const auto prox_ranking = rank_families(make_sample(proximity_sample(net)));
    auto order_string = [](const FamilyRanking& r) {
      std::string s;
      for (const auto& fit : r.ranked) s += " " + family_name(fit.family);
      return s;
    };
    c.check(div_ranking.ranked.back().family == Family::Normal,
            std::string(t.label) + ": diversification ranking" + order_string(div_ranking) +
                " (normal worst)");
    c.check(ub_ranking.ranked.back().family == Family::Normal,
            std::string(t.label) + ": ubiquity ranking" + order_string(ub_ranking) +
                " (normal worst)");
    c.check(prox_ranking.ranked.back().family == Family::Normal,
            std::string(t.label) + ": proximity ranking" + order_string(prox_ranking) +
                " (normal worst)");
    c.check(prox_ranking.ranked.front().family == Family::Weibull,
            std::string(t.label) + ": proximity ranking" + order_string(prox_ranking) +
                " (weibull best)");
  }
  return c;
}

Criterion criterion_9() {
  Criterion c{9, "heterogeneous refit beats the homogeneous model on diversification"};
  // target world with a spread of per-country capability probabilities, so
  // its diversification distribution is broad the way the trade data is; the
  // homogeneous baseline is density-matched the way the calibration pipeline
  // would match it
  Rng rng(0xC9);
  std::vector<double> target_rc(129);
  for (double& r : target_rc) r = 0.65 + 0.30 * rng.next_double();
  const BipartiteNetwork target =
      leontief(sample_heterogeneous_world(target_rc, 0.1795, 80, 772, rng.next_u64()));
  const DegreeProfile profile = degree_profile(target);
  std::vector<double> k_c0;
  for (std::size_t i = 0; i < profile.k_c0.size(); ++i)
    if (profile.k_c0[i] > 0) k_c0.push_back(static_cast<double>(profile.k_c0[i]));

  const double eta = density(target);
  const QFromDensity qd = q_from_density(eta, 0.87, 80);
  const BinomialParams fit_params{0.87, qd.q, 80, k_c0.size(), 772};
  const HeterogeneousRc rc = heterogeneous_rc(k_c0, fit_params);
  const HeterogeneousReport hetero =
      heterogeneous_fit_report(rc.r_c, fit_params, k_c0, 1000, derive_seed(0xC9, 1));

  std::vector<double> homogeneous;
  homogeneous.reserve(1000 * k_c0.size());
  std::vector<std::vector<double>> slots(1000);
  parallel_for(1000, [&](std::size_t rep) {
    const BipartiteNetwork net = leontief(sample_world(fit_params, derive_seed(0xC9 + 2, rep)));
    std::vector<double>& slot = slots[rep];
    slot.resize(fit_params.n_countries);
    for (std::size_t i = 0; i < fit_params.n_countries; ++i)
      slot[i] = static_cast<double>(net.adjacency.ones_in_row(i));
  });
  for (const auto& slot : slots) homogeneous.insert(homogeneous.end(), slot.begin(), slot.end());
  const double ks_hom = ks_statistic(make_sample(k_c0), make_sample(homogeneous));
  c.check(hetero.ks < ks_hom,
          "heterogeneous target at SITC-4 dims, 1000 replicates: heterogeneous KS " +
              num(hetero.ks) + " < homogeneous KS " + num(ks_hom));
  return c;
}

Criterion criterion_10() {
  Criterion c{10, "identical seeds give byte-identical outputs across all subcommands"};
  const fs::path base =
      fs::temp_directory_path() / ("capnet_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(base);
  fs::create_directories(base);
  std::string failed_commands;
  auto cli = [&](const std::string& args) {
    const std::string cmd =
        std::string(CAPNET_CLI_PATH) + " " + args + " > /dev/null 2> /dev/null";
    const bool ok = std::system(cmd.c_str()) == 0;
    if (!ok) failed_commands += " [" + args.substr(0, args.find(' ')) + "]";
    return ok;
  };
  auto tree_bytes = [&](const fs::path& dir) {
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
      if (entry.is_regular_file()) {
        std::ifstream in(entry.path(), std::ios::binary);
        entries.emplace_back(fs::relative(entry.path(), dir).string(),
                             std::string(std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()));
      }
    std::sort(entries.begin(), entries.end());
    return entries;
  };

  // stage inputs produced once; the two compared runs then execute every
  // subcommand with identical arguments, differing only in the output root
  bool all_ok = true;
  {
    Rng rng(1717);
    std::ostringstream values;
    values << "value\n";
    for (int i = 0; i < 500; ++i) values << num(std::exp(0.4 * rng.normal())) << "\n";
    write_text_file(base / "fit_input.csv", values.str());
    const std::string src = (base / "src").string() + "/";
    all_ok &= cli("ingest --synthetic --countries 30 --products 60 --na 10 --r 0.85 --q 0.25 "
                  "--seed 404 --out " + src + "ingest");
    all_ok &= cli("rca --table " + src + "ingest/export_table.csv --out " + src + "rca");
    all_ok &= cli("metrics --matrix " + src + "ingest/planted_network.csv --out " + src + "metrics");
    all_ok &= cli("nullmodel --matrix " + src + "ingest/planted_network.csv --model 1 "
                  "--replicates 6 --seed 5 --out " + src + "metrics");
  }
  const std::string table = (base / "src/ingest/export_table.csv").string();
  const std::string rca_csv = (base / "src/rca/rca.csv").string();
  const std::string net_csv = (base / "src/ingest/planted_network.csv").string();
  const std::string run_dir = (base / "src/metrics").string();
  for (const std::string run : {"a", "b"}) {
    const std::string d = (base / run).string() + "/";
    bool ok = true;
    ok &= cli("ingest --synthetic --countries 30 --products 60 --na 10 --r 0.85 --q 0.25 "
              "--seed 404 --out " + d + "ingest");
    ok &= cli("rca --table " + table + " --log10 --out " + d + "rca");
    ok &= cli("matrix --rca " + rca_csv + " --threshold 0.2 --edge-list --triangular --out " +
              d + "matrix");
    ok &= cli("metrics --matrix " + net_csv + " --out " + d + "metrics");
    ok &= cli("nullmodel --matrix " + net_csv + " --model 1 --replicates 6 --seed 5 --out " +
              d + "nm1");
    ok &= cli("nullmodel --matrix " + net_csv + " --model 4 --replicates 6 --seed 5 --out " +
              d + "nm4");
    ok &= cli("fitdist --input " + (base / "fit_input.csv").string() + " --out " + d + "fitdist");
    ok &= cli("model simulate --countries 20 --products 50 --na 8 --r 0.8 --q 0.3 --seed 6 "
              "--out " + d + "sim");
    ok &= cli("model analytic --countries 20 --products 50 --na 8 --r 0.8 --q 0.3 --points 40 "
              "--derivative-checks --out " + d + "analytic");
    ok &= cli("quiescence --na 25 --q 0.3 --points 30 --out " + d + "quiescence");
    ok &= cli("calibrate --matrix " + net_csv + " --r-min 0.75 --r-max 0.93 "
              "--r-step 0.06 --na-min 5 --na-max 20 --na-step 5 --seeds-per-cell 2 --seed 12 "
              "--r2-quantile 0.5 --ks-quantile 0.5 --hetero-replicates 30 --out " + d + "cal");
    ok &= cli("report --run " + run_dir + " --out " + d + "report");
    all_ok &= ok;
  }
  const bool identical = all_ok && tree_bytes(base / "a") == tree_bytes(base / "b");
  c.check(identical, std::string("two full pipeline runs with equal seeds are byte-identical: ") +
                         (identical ? "yes" : "no") +
                         (failed_commands.empty() ? "" : " (failed:" + failed_commands + ")"));
  fs::remove_all(base);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  int failures = 0;
  for (int id : which) {
    Criterion result{0, "", {}};
    switch (id) {
      case 1: result = criterion_1(); break;
      case 2: result = criterion_2(); break;
      case 3: result = criterion_3(); break;
      case 4: result = criterion_4(); break;
      case 5: result = criterion_5(); break;
      case 6: result = criterion_6(); break;
      case 7: result = criterion_7(); break;
      case 8: result = criterion_8(); break;
      case 9: result = criterion_9(); break;
      case 10: result = criterion_10(); break;
      default:
        std::cerr << "unknown criterion " << id << "\n";
        return 2;
    }
    const bool pass = result.passed();
    failures += pass ? 0 : 1;
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << result.id << ": "
              << result.title << "\n";
    for (const auto& check : result.checks)
      std::cout << "       " << (check.pass ? "[ok]  " : "[FAIL]") << " " << check.detail << "\n";
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << "\n";
  return failures;
}
