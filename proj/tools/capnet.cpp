#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "capnet/capnet.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Collects outputs and writes the run manifest (inputs, options, seed, files
// produced). Existing files are never overwritten unless --force was given.
class RunContext {
 public:
  RunContext(std::string name, const std::string& out_option, bool force)
      : name_(std::move(name)), force_(force) {
    if (!out_option.empty()) {
      dir_ = out_option;
    } else if (const char* root = std::getenv("CAPNET_OUT_ROOT")) {
      dir_ = fs::path(root) / name_;
    } else {
      throw capnet::validation_error("no output directory: pass --out or set CAPNET_OUT_ROOT");
    }
    fs::create_directories(dir_);
    manifest_["tool"] = "capnet";
    manifest_["version"] = capnet::kVersion;
    manifest_["subcommand"] = name_;
    manifest_["seed"] = nullptr;
    manifest_["inputs"] = json::array();
    manifest_["options"] = json::object();
  }

  const fs::path& dir() const { return dir_; }

  fs::path path_for(const std::string& filename) {
    const fs::path p = dir_ / filename;
    if (fs::exists(p) && !force_)
      throw capnet::validation_error("output file exists (use --force to overwrite): " +
                                     p.string());
    outputs_.push_back(filename);
    return p;
  }

  void write_text(const std::string& filename, std::string_view content) {
    capnet::write_text_file(path_for(filename), content);
  }

  void write_json(const std::string& filename, const json& j) {
    capnet::write_text_file(path_for(filename), j.dump(2) + "\n");
  }

  void note_input(const fs::path& p) { manifest_["inputs"].push_back(p.string()); }
  void set_seed(std::uint64_t seed) { manifest_["seed"] = seed; }
  template <typename T>
  void set_option(const std::string& key, const T& value) {
    manifest_["options"][key] = value;
  }

  void finish() {
    manifest_["outputs"] = outputs_;
    const fs::path p = dir_ / (name_ + "_manifest.json");
    if (fs::exists(p) && !force_)
      throw capnet::validation_error("output file exists (use --force to overwrite): " +
                                     p.string());
    capnet::write_text_file(p, manifest_.dump(2) + "\n");
  }

 private:
  std::string name_;
  fs::path dir_;
  bool force_ = false;
  json manifest_;
  std::vector<std::string> outputs_;
};

std::string csv_optional(const std::optional<double>& v) {
  return v ? capnet::format_double(*v) : std::string();
}

void write_degrees_csv(RunContext& run, const std::string& filename,
                       const std::vector<std::string>& labels,
                       const std::vector<std::size_t>& k0,
                       const std::vector<std::optional<double>>& k1) {
  std::ostringstream out;
  out << "label,k0,k1\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << labels[i] << ',' << k0[i] << ',' << csv_optional(k1[i]) << '\n';
  run.write_text(filename, out.str());
}

void write_xy_csv(RunContext& run, const std::string& filename,
                  const std::vector<std::pair<double, double>>& points) {
  std::ostringstream out;
  out << "x,y\n";
  for (const auto& [x, y] : points)
    out << capnet::format_double(x) << ',' << capnet::format_double(y) << '\n';
  run.write_text(filename, out.str());
}

json fit_to_json(const capnet::FitResult& fit) {
  json params;
  switch (fit.family) {
    case capnet::Family::Normal:
      params = {{"mean", fit.p1}, {"sd", fit.p2}};
      break;
    case capnet::Family::LogNormal:
      params = {{"log_mean", fit.p1}, {"log_sd", fit.p2}};
      break;
    case capnet::Family::Weibull:
      params = {{"scale", fit.p1}, {"shape", fit.p2}};
      break;
  }
  return json{{"family", capnet::family_name(fit.family)},
              {"params", params},
              {"log_likelihood", fit.log_likelihood},
              {"ks", fit.ks_stat},
              {"n_used", fit.n_used},
              {"n_excluded", fit.n_excluded}};
}

// ---------------------------------------------------------------- ingest --

struct IngestOptions {
  std::string input, out;
  bool force = false;
  std::optional<int> year;
  bool synthetic = false;
  std::size_t countries = 100, products = 500, n_caps = 40;
  double r = 0.9, q = 0.25;
  std::uint64_t seed = 0;
};

void run_ingest(const IngestOptions& opt) {
  RunContext run("ingest", opt.out, opt.force);
  std::vector<capnet::TradeRecord> records;
  if (opt.synthetic) {
    capnet::BinomialParams params{opt.r, opt.q, opt.n_caps, opt.countries, opt.products};
    const capnet::SyntheticTrade synth = capnet::make_synthetic_trade(params, opt.seed);
    records = synth.records;
    capnet::write_trade_records(run.path_for("synthetic_trade.csv"), records);
    capnet::write_network(run.path_for("planted_network.csv"), synth.planted);
    run.set_seed(opt.seed);
    run.set_option("synthetic", true);
    run.set_option("r", opt.r);
    run.set_option("q", opt.q);
    run.set_option("na", opt.n_caps);
    run.set_option("countries", opt.countries);
    run.set_option("products", opt.products);
    run.set_option("safe_rca_threshold", synth.safe_threshold);
  } else {
    if (opt.input.empty())
      throw capnet::validation_error("ingest: --input is required unless --synthetic");
    run.note_input(opt.input);
    if (opt.year) run.set_option("year", *opt.year);
    records = capnet::parse_trade_csv(opt.input, opt.year);
    if (records.empty()) throw capnet::validation_error("ingest: no records after filtering");
  }
  const capnet::ExportTable table = capnet::aggregate(records);
  capnet::write_export_table(run.path_for("export_table.csv"), table);
  run.set_option("records", records.size());
  run.set_option("table_countries", table.countries.size());
  run.set_option("table_products", table.products.size());
  run.finish();
}

// ------------------------------------------------------------------- rca --

struct RcaOptions {
  std::string table, out;
  bool force = false;
  bool log10 = false;
};

void run_rca(const RcaOptions& opt) {
  RunContext run("rca", opt.out, opt.force);
  run.note_input(opt.table);
  const capnet::ExportTable table = capnet::read_export_table(opt.table);
  const capnet::RcaMatrix rca = capnet::compute_rca(table);
  capnet::write_rca_matrix(run.path_for("rca.csv"), rca);
  if (opt.log10) capnet::write_rca_log10(run.path_for("rca_log10.csv"), rca);
  run.set_option("dropped_countries", rca.dropped_countries);
  run.set_option("dropped_products", rca.dropped_products);
  run.set_option("world_total", rca.source_total);
  run.finish();
}

// ---------------------------------------------------------------- matrix --

struct MatrixOptions {
  std::string rca, out;
  double threshold = 1.0;
  bool force = false;
  bool edge_list = false;
  bool triangular = false;
};

void run_matrix(const MatrixOptions& opt) {
  RunContext run("matrix", opt.out, opt.force);
  run.note_input(opt.rca);
  run.set_option("threshold", opt.threshold);
  const capnet::RcaMatrix rca = capnet::read_rca_matrix(opt.rca);
  const capnet::BipartiteNetwork net = capnet::threshold(rca, opt.threshold);
  capnet::write_network(run.path_for("matrix.csv"), net);
  if (opt.edge_list) capnet::write_edge_list(run.path_for("edges.csv"), net);
  if (opt.triangular) {
    const capnet::TriangularOrder order = capnet::triangular_order(net);
    capnet::BipartiteNetwork sorted;
    sorted.threshold = net.threshold;
    sorted.adjacency = capnet::BitMatrix(net.country_count(), net.product_count());
    const auto countries = capnet::country_labels(net);
    const auto products = capnet::product_labels(net);
    for (std::size_t i = 0; i < net.country_count(); ++i) {
      sorted.countries.push_back(countries[order.row_order[i]]);
      for (std::size_t j = 0; j < net.product_count(); ++j)
        if (net.adjacency.test(order.row_order[i], order.col_order[j])) sorted.adjacency.set(i, j);
    }
    for (std::size_t j = 0; j < net.product_count(); ++j)
      sorted.products.push_back(products[order.col_order[j]]);
    capnet::write_network(run.path_for("matrix_triangular.csv"), sorted);
  }
  run.set_option("edges", net.edge_count());
  run.finish();
}

// --------------------------------------------------------------- metrics --

struct MetricsOptions {
  std::string matrix, out;
  bool force = false;
};

void run_metrics(const MetricsOptions& opt) {
  RunContext run("metrics", opt.out, opt.force);
  run.note_input(opt.matrix);
  const capnet::BipartiteNetwork net = capnet::read_network(opt.matrix);
  const capnet::DegreeProfile profile = capnet::degree_profile(net);
  write_degrees_csv(run, "country_degrees.csv", capnet::country_labels(net), profile.k_c0,
                    profile.k_c1);
  write_degrees_csv(run, "product_degrees.csv", capnet::product_labels(net), profile.k_p0,
                    profile.k_p1);

  const capnet::ProximityMatrix prox = capnet::proximity(net);
  std::ostringstream out;
  out << "p,p',phi\n";
  for (std::size_t i = 0; i < prox.n; ++i)
    for (std::size_t j = i + 1; j < prox.n; ++j)
      out << prox.products[i] << ',' << prox.products[j] << ','
          << capnet::format_double(prox.phi(i, j)) << '\n';
  run.write_text("proximity.csv", out.str());

  run.write_json("density.json",
                 json{{"countries", net.country_count()},
                      {"products", net.product_count()},
                      {"edges", net.edge_count()},
                      {"density", capnet::density(net)},
                      {"undefined_proximity_pairs", prox.undefined_pairs()}});
  run.finish();
}

// ------------------------------------------------------------- nullmodel --

struct NullModelOptions {
  std::string matrix, out;
  int model = 1;
  std::size_t replicates = 2;
  std::uint64_t seed = 0;
  std::size_t swap_factor = 100;
  bool force = false;
};

void run_nullmodel(const NullModelOptions& opt) {
  if (opt.model < 1 || opt.model > 4)
    throw capnet::validation_error("nullmodel: --model must be 1, 2, 3 or 4");
  RunContext run("nullmodel_nm" + std::to_string(opt.model), opt.out, opt.force);
  run.note_input(opt.matrix);
  run.set_seed(opt.seed);
  run.set_option("model", opt.model);
  run.set_option("replicates", opt.replicates);
  run.set_option("swap_factor", opt.swap_factor);

  const capnet::BipartiteNetwork net = capnet::read_network(opt.matrix);
  capnet::EnsembleSpec spec;
  spec.model = static_cast<capnet::NullModel>(opt.model);
  spec.replicates = opt.replicates;
  spec.seed = opt.seed;
  spec.swap_factor = opt.swap_factor;
  const capnet::EnsembleSummary summary = capnet::ensemble_diagram(net, spec);

  std::ostringstream out;
  out << "k0_bin,mean_k1,std_k1,side\n";
  for (const auto& bin : summary.country_bins)
    out << capnet::format_double(bin.k0) << ',' << capnet::format_double(bin.mean_k1) << ','
        << capnet::format_double(bin.std_k1) << ",country\n";
  for (const auto& bin : summary.product_bins)
    out << capnet::format_double(bin.k0) << ',' << capnet::format_double(bin.mean_k1) << ','
        << capnet::format_double(bin.std_k1) << ",product\n";
  const std::string base = "nullmodel_nm" + std::to_string(opt.model);
  run.write_text(base + "_summary.csv", out.str());
  run.write_json(base + "_stats.json",
                 json{{"model", opt.model},
                      {"replicates", summary.replicates},
                      {"country_loglog_slope_mean", summary.country_slope_mean},
                      {"country_loglog_slope_std", summary.country_slope_std},
                      {"product_loglog_slope_mean", summary.product_slope_mean},
                      {"product_loglog_slope_std", summary.product_slope_std}});
  run.finish();
}

// --------------------------------------------------------------- fitdist --

struct FitDistOptions {
  std::string input, out, families = "normal,lognormal,weibull";
  bool weighted_ks = false;
  bool force = false;
};

void run_fitdist(const FitDistOptions& opt) {
  RunContext run("fitdist", opt.out, opt.force);
  run.note_input(opt.input);
  run.set_option("families", opt.families);
  run.set_option("weighted_ks", opt.weighted_ks);

  const capnet::CsvTable table = capnet::read_csv(opt.input);
  const auto col = capnet::find_column(table, "value");
  if (!col) throw capnet::validation_error(opt.input + ": missing required column 'value'");
  std::vector<double> values;
  values.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    values.push_back(capnet::parse_double(
        table.rows[i][*col], opt.input + ":" + std::to_string(table.line_numbers[i])));
  const capnet::Sample sample = capnet::make_sample(std::move(values));

  std::vector<capnet::Family> families;
  std::stringstream ss(opt.families);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name == "normal") {
      families.push_back(capnet::Family::Normal);
    } else if (name == "lognormal") {
      families.push_back(capnet::Family::LogNormal);
    } else if (name == "weibull") {
      families.push_back(capnet::Family::Weibull);
    } else {
      throw capnet::validation_error("fitdist: unknown family '" + name + "'");
    }
  }
  capnet::FamilyRanking ranking = capnet::rank_families(sample, families);
  if (opt.weighted_ks) {
    const auto positives = capnet::positive_subsample(sample);
    for (auto& fit : ranking.ranked)
      fit.ks_stat = capnet::ks_statistic(positives.sample, capnet::fitted_cdf(fit), true);
  }

  json fits = json::array();
  json order = json::array();
  for (const auto& fit : ranking.ranked) {
    fits.push_back(fit_to_json(fit));
    order.push_back(capnet::family_name(fit.family));
  }
  json failures = json::array();
  for (const auto& [family, message] : ranking.failures)
    failures.push_back(json{{"family", capnet::family_name(family)}, {"error", message}});
  run.write_json("fit.json", json{{"n", sample.values.size()},
                                  {"excluded", ranking.excluded},
                                  {"weighted_ks", opt.weighted_ks},
                                  {"fits", fits},
                                  {"failures", failures},
                                  {"ranking", order}});
  run.finish();
}

// ----------------------------------------------------------------- model --

struct ModelOptions {
  std::size_t countries = 100, products = 500, n_caps = 40;
  double r = 0.9, q = 0.25;
  std::uint64_t seed = 0;
  std::string out, rc_file;
  std::size_t points = 200;
  bool derivative_checks = false;
  bool force = false;
};

void run_model_simulate(const ModelOptions& opt) {
  RunContext run("model_simulate", opt.out, opt.force);
  run.set_seed(opt.seed);
  run.set_option("na", opt.n_caps);
  run.set_option("q", opt.q);
  run.set_option("products", opt.products);

  capnet::CapabilityWorld world;
  if (!opt.rc_file.empty()) {
    run.note_input(opt.rc_file);
    const capnet::CsvTable table = capnet::read_csv(opt.rc_file);
    const auto col = capnet::find_column(table, "r_c");
    if (!col) throw capnet::validation_error(opt.rc_file + ": missing required column 'r_c'");
    std::vector<double> r_c;
    for (std::size_t i = 0; i < table.rows.size(); ++i)
      r_c.push_back(capnet::parse_double(
          table.rows[i][*col], opt.rc_file + ":" + std::to_string(table.line_numbers[i])));
    world = capnet::sample_heterogeneous_world(r_c, opt.q, opt.n_caps, opt.products, opt.seed);
    run.set_option("heterogeneous", true);
  } else {
    capnet::BinomialParams params{opt.r, opt.q, opt.n_caps, opt.countries, opt.products};
    world = capnet::sample_world(params, opt.seed);
    run.set_option("r", opt.r);
  }

  const std::vector<std::string> cap_labels = capnet::indexed_labels('A', opt.n_caps);
  const std::vector<std::string> country_labels =
      capnet::indexed_labels('C', world.country_caps.rows());
  const std::vector<std::string> product_labels =
      capnet::indexed_labels('P', world.product_reqs.rows());

  capnet::write_labeled_matrix(run.path_for("C.csv"), country_labels, cap_labels,
                               [&](std::size_t i, std::size_t j) {
                                 return world.country_caps.test(i, j) ? "1" : "0";
                               });
  capnet::write_labeled_matrix(run.path_for("P.csv"), product_labels, cap_labels,
                               [&](std::size_t i, std::size_t j) {
                                 return world.product_reqs.test(i, j) ? "1" : "0";
                               });
  const capnet::BipartiteNetwork net = capnet::leontief(world);
  capnet::write_network(run.path_for("matrix.csv"), net);
  run.set_option("countries", world.country_caps.rows());
  run.set_option("edges", net.edge_count());
  run.finish();
}

void run_model_analytic(const ModelOptions& opt) {
  RunContext run("model_analytic", opt.out, opt.force);
  capnet::BinomialParams params{opt.r, opt.q, opt.n_caps, opt.countries, opt.products};
  params.validate();
  run.set_option("r", opt.r);
  run.set_option("q", opt.q);
  run.set_option("na", opt.n_caps);
  run.set_option("countries", opt.countries);
  run.set_option("products", opt.products);

  const double np = static_cast<double>(opt.products);
  std::vector<std::pair<double, double>> kc0_kc1;
  for (std::size_t i = 1; i <= opt.points; ++i) {
    const double k0 = np * static_cast<double>(i) / static_cast<double>(opt.points);
    kc0_kc1.emplace_back(k0, capnet::expected_k_c1(params, k0));
  }
  write_xy_csv(run, "kc0_kc1.csv", kc0_kc1);

  const capnet::DensityCurve div = capnet::diversification_pdf(params);
  std::vector<std::pair<double, double>> div_points(div.x.size());
  for (std::size_t i = 0; i < div.x.size(); ++i) div_points[i] = {div.x[i], div.pdf[i]};
  write_xy_csv(run, "diversification_pdf.csv", div_points);

  const capnet::DensityCurve ub = capnet::ubiquity_pdf(params);
  std::vector<std::pair<double, double>> ub_points(ub.x.size());
  for (std::size_t i = 0; i < ub.x.size(); ++i) ub_points[i] = {ub.x[i], ub.pdf[i]};
  write_xy_csv(run, "ubiquity_pdf.csv", ub_points);

  std::vector<double> k_grid(opt.points + 1);
  const double na = static_cast<double>(opt.n_caps);
  for (std::size_t i = 0; i <= opt.points; ++i)
    k_grid[i] = na * static_cast<double>(i) / static_cast<double>(opt.points);
  write_xy_csv(run, "quiescence.csv", capnet::quiescence_curve(params, k_grid));

  if (opt.derivative_checks) {
    const capnet::DerivativeChecks checks = capnet::derivative_checks(params);
    run.write_json("derivative_checks.json",
                   json{{"max_rel_err_diversification_slope",
                         checks.max_rel_err_eq_diversification_slope},
                        {"max_rel_err_k_c1_slope", checks.max_rel_err_eq_k_c1_slope},
                        {"max_rel_err_hist_d1", checks.max_rel_err_hist_d1},
                        {"max_rel_err_hist_d2", checks.max_rel_err_hist_d2},
                        {"sign_ok_diversification_slope", checks.sign_ok_diversification_slope},
                        {"sign_ok_k_c1_slope", checks.sign_ok_k_c1_slope},
                        {"sign_ok_hist_d1", checks.sign_ok_hist_d1},
                        {"sign_ok_hist_d2", checks.sign_ok_hist_d2},
                        {"ubiquity_approx_max_abs_err", checks.ubiquity_approx_max_abs_err}});
  }
  run.finish();
}

// ------------------------------------------------------------ quiescence --

struct QuiescenceOptions {
  std::size_t n_caps = 50;
  double q = 0.2;
  std::size_t points = 200;
  std::string out;
  bool force = false;
};

void run_quiescence(const QuiescenceOptions& opt) {
  RunContext run("quiescence", opt.out, opt.force);
  run.set_option("na", opt.n_caps);
  run.set_option("q", opt.q);
  // the curve depends only on q and N_a; dimensions and r cancel out of the
  // (capability fraction, product fraction) pairs
  capnet::BinomialParams params{0.5, opt.q, opt.n_caps, 1, 1};
  std::vector<double> k_grid(opt.points + 1);
  const double na = static_cast<double>(opt.n_caps);
  for (std::size_t i = 0; i <= opt.points; ++i)
    k_grid[i] = na * static_cast<double>(i) / static_cast<double>(opt.points);
  write_xy_csv(run, "quiescence.csv", capnet::quiescence_curve(params, k_grid));
  run.finish();
}

// ------------------------------------------------------------- calibrate --

struct CalibrateOptions {
  std::string matrix, out;
  double r_min = 0.50, r_max = 0.98, r_step = 0.02;
  std::size_t na_min = 10, na_max = 200, na_step = 5;
  std::size_t seeds_per_cell = 5;
  std::uint64_t seed = 0;
  double r2_quantile = 0.10, ks_quantile = 0.10;
  std::size_t hetero_replicates = 1000;
  std::size_t threads = 0;
  bool force = false;
};

void run_calibrate(const CalibrateOptions& opt) {
  RunContext run("calibrate", opt.out, opt.force);
  run.note_input(opt.matrix);
  run.set_seed(opt.seed);
  run.set_option("r_min", opt.r_min);
  run.set_option("r_max", opt.r_max);
  run.set_option("r_step", opt.r_step);
  run.set_option("na_min", opt.na_min);
  run.set_option("na_max", opt.na_max);
  run.set_option("na_step", opt.na_step);
  run.set_option("seeds_per_cell", opt.seeds_per_cell);
  run.set_option("r2_quantile", opt.r2_quantile);
  run.set_option("ks_quantile", opt.ks_quantile);
  run.set_option("hetero_replicates", opt.hetero_replicates);

  const capnet::BipartiteNetwork net = capnet::read_network(opt.matrix);
  const capnet::DegreeProfile profile = capnet::degree_profile(net);
  const double eta = capnet::density(net);
  const auto diagram_points = capnet::diagram(profile, capnet::DiagramSide::Country);
  const capnet::Sample phi = capnet::make_sample(capnet::proximity_sample(net));
  const capnet::CalibrationAxes axes =
      capnet::make_axes(opt.r_min, opt.r_max, opt.r_step, opt.na_min, opt.na_max, opt.na_step);

  const capnet::CalibrationGrid r2_layer = capnet::fit_kc0_kc1_grid(
      diagram_points, eta, axes, net.country_count(), net.product_count());
  const capnet::CalibrationGrid ks_layer =
      capnet::proximity_ks_grid(phi, net.country_count(), net.product_count(), eta, axes,
                                opt.seeds_per_cell, opt.seed, opt.threads);

  std::ostringstream grid_csv;
  grid_csv << "r,na,q,r2,ks,feasible\n";
  for (std::size_t ri = 0; ri < axes.r_values.size(); ++ri)
    for (std::size_t ni = 0; ni < axes.na_values.size(); ++ni) {
      const capnet::GridCell& rc = r2_layer.at(ri, ni);
      const capnet::GridCell& kc = ks_layer.at(ri, ni);
      grid_csv << capnet::format_double(axes.r_values[ri]) << ',' << axes.na_values[ni] << ','
               << capnet::format_double(rc.q) << ','
               << (rc.feasible ? capnet::format_double(rc.r2) : std::string()) << ','
               << (kc.feasible ? capnet::format_double(kc.ks) : std::string()) << ','
               << (rc.feasible ? 1 : 0) << '\n';
    }
  run.write_text("grid.csv", grid_csv.str());

  capnet::CalibrationResult result =
      capnet::intersect(r2_layer, ks_layer, opt.r2_quantile, opt.ks_quantile);

  std::vector<double> k_c0;
  std::size_t dropped_zero = 0;
  for (std::size_t c = 0; c < profile.k_c0.size(); ++c) {
    if (profile.k_c0[c] > 0) {
      k_c0.push_back(static_cast<double>(profile.k_c0[c]));
    } else {
      ++dropped_zero;
    }
  }
  capnet::BinomialParams chosen_params{result.chosen.r, result.chosen.q,
                                       result.chosen.n_capabilities, k_c0.size(),
                                       net.product_count()};
  const capnet::HeterogeneousRc rc = capnet::heterogeneous_rc(k_c0, chosen_params);
  result.r_c = rc.r_c;
  const capnet::HeterogeneousReport hetero = capnet::heterogeneous_fit_report(
      rc.r_c, chosen_params, k_c0, opt.hetero_replicates, capnet::derive_seed(opt.seed, 0x48455431),
      opt.threads);

  json region = json::array();
  for (const auto& [ri, ni] : result.region)
    region.push_back(json{{"r", axes.r_values[ri]}, {"na", axes.na_values[ni]}});
  run.write_json(
      "result.json",
      json{{"seed", opt.seed},
           {"eta", eta},
           {"countries", net.country_count()},
           {"products", net.product_count()},
           {"chosen", json{{"r", result.chosen.r},
                           {"na", result.chosen.n_capabilities},
                           {"q", result.chosen.q},
                           {"r2", result.chosen.r2},
                           {"ks", result.chosen.ks}}},
           {"region", region},
           {"r2_quantile", opt.r2_quantile},
           {"ks_quantile", opt.ks_quantile},
           {"r_c", result.r_c},
           {"r_c_clipped_low", rc.clipped_low},
           {"r_c_clipped_high", rc.clipped_high},
           {"zero_diversification_countries", dropped_zero},
           {"hetero", json{{"replicates", hetero.replicates}, {"ks", hetero.ks}}}});

  std::ostringstream hist_csv;
  hist_csv << "bin_lo,bin_hi,empirical,simulated\n";
  for (std::size_t b = 0; b < hetero.histogram.empirical.size(); ++b) {
    const double lo = hetero.histogram.lo + hetero.histogram.width * static_cast<double>(b);
    hist_csv << capnet::format_double(lo) << ','
             << capnet::format_double(lo + hetero.histogram.width) << ','
             << capnet::format_double(hetero.histogram.empirical[b]) << ','
             << capnet::format_double(hetero.histogram.simulated[b]) << '\n';
  }
  run.write_text("hetero_comparison.csv", hist_csv.str());
  run.finish();
}

// ---------------------------------------------------------------- report --

struct ReportOptions {
  std::string run_dir, out;
  bool force = false;
};

std::vector<std::pair<double, double>> degrees_diagram(const capnet::CsvTable& table,
                                                       const std::string& context) {
  const auto col_k0 = capnet::find_column(table, "k0");
  const auto col_k1 = capnet::find_column(table, "k1");
  if (!col_k0 || !col_k1)
    throw capnet::validation_error(context + ": expected columns label,k0,k1");
  std::vector<std::pair<double, double>> points;
  for (const auto& row : table.rows) {
    if (row[*col_k1].empty()) continue;
    points.emplace_back(capnet::parse_double(row[*col_k0], context),
                        capnet::parse_double(row[*col_k1], context));
  }
  return points;
}

void run_report(const ReportOptions& opt) {
  const fs::path dir = opt.run_dir;
  auto require = [&](const std::string& name) {
    const fs::path p = dir / name;
    if (!fs::exists(p))
      throw capnet::validation_error("report: missing required artifact '" + name + "' in " +
                                     dir.string());
    return p;
  };
  const fs::path country_path = require("country_degrees.csv");
  const fs::path product_path = require("product_degrees.csv");
  const fs::path proximity_path = require("proximity.csv");
  const fs::path density_path = require("density.json");

  RunContext run("report", opt.out.empty() ? dir.string() : opt.out, opt.force);
  run.note_input(country_path);
  run.note_input(product_path);
  run.note_input(proximity_path);
  run.note_input(density_path);

  const capnet::CsvTable country_table = capnet::read_csv(country_path);
  const capnet::CsvTable product_table = capnet::read_csv(product_path);
  const auto country_points = degrees_diagram(country_table, country_path.string());
  const auto product_points = degrees_diagram(product_table, product_path.string());

  std::vector<double> kc0, kc1;
  for (const auto& [x, y] : country_points) {
    kc0.push_back(x);
    kc1.push_back(y);
  }
  const auto log_slope = capnet::diagram_log_slope(country_points);
  const double slope = log_slope.value_or(0.0);
  const double rho = capnet::spearman_rho(kc0, kc1);

  // per-bin 2-sigma band comparison against every null-model ensemble found
  // in the run directory
  json bands = json::array();
  bool outside_all_shuffle_bands = true;
  bool any_shuffle_band = false;
  for (int model = 1; model <= 4; ++model) {
    const fs::path p = dir / ("nullmodel_nm" + std::to_string(model) + "_summary.csv");
    if (!fs::exists(p)) continue;
    const capnet::CsvTable ensemble = capnet::read_csv(p);
    const auto col_k0 = capnet::find_column(ensemble, "k0_bin");
    const auto col_mean = capnet::find_column(ensemble, "mean_k1");
    const auto col_std = capnet::find_column(ensemble, "std_k1");
    const auto col_side = capnet::find_column(ensemble, "side");
    if (!col_k0 || !col_mean || !col_std || !col_side)
      throw capnet::validation_error(p.string() + ": expected columns k0_bin,mean_k1,std_k1,side");
    std::vector<capnet::EnsembleBin> bins;
    for (const auto& row : ensemble.rows) {
      if (row[*col_side] != "country") continue;
      capnet::EnsembleBin bin;
      bin.k0 = capnet::parse_double(row[*col_k0], p.string());
      bin.mean_k1 = capnet::parse_double(row[*col_mean], p.string());
      bin.std_k1 = capnet::parse_double(row[*col_std], p.string());
      bins.push_back(bin);
    }
    const double share = capnet::band_violation_share(country_points, bins);
    bands.push_back(json{{"model", model}, {"outside_band_share", share}});
    if (model <= 3) {
      any_shuffle_band = true;
      if (share < 0.5) outside_all_shuffle_bands = false;
    }
    run.note_input(p);
  }
  if (!any_shuffle_band)
    throw capnet::validation_error(
        "report: missing required artifact 'nullmodel_nm{1|2|3}_summary.csv' in " + dir.string());

  // family rankings for facts 2-4
  auto sample_of = [](const std::vector<std::pair<double, double>>& pts, bool first) {
    std::vector<double> v;
    v.reserve(pts.size());
    for (const auto& p : pts) v.push_back(first ? p.first : p.second);
    return v;
  };
  const capnet::CsvTable prox_table = capnet::read_csv(proximity_path);
  const auto col_phi = capnet::find_column(prox_table, "phi");
  if (!col_phi) throw capnet::validation_error(proximity_path.string() + ": missing column 'phi'");
  std::vector<double> phi_values;
  phi_values.reserve(prox_table.rows.size());
  for (const auto& row : prox_table.rows)
    phi_values.push_back(capnet::parse_double(row[*col_phi], proximity_path.string()));

  auto ranking_json = [](const capnet::FamilyRanking& ranking) {
    json order = json::array();
    for (const auto& fit : ranking.ranked) order.push_back(capnet::family_name(fit.family));
    return order;
  };
  const auto div_ranking = capnet::rank_families(capnet::make_sample(sample_of(country_points, true)));
  const auto ub_ranking = capnet::rank_families(capnet::make_sample(sample_of(product_points, true)));
  const auto prox_ranking = capnet::rank_families(capnet::make_sample(phi_values));
  auto worst_is_normal = [](const capnet::FamilyRanking& r) {
    return r.ranked.back().family == capnet::Family::Normal;
  };
  auto best_is_weibull = [](const capnet::FamilyRanking& r) {
    return r.ranked.front().family == capnet::Family::Weibull;
  };

  std::ifstream dens_in(density_path);
  const json density = json::parse(dens_in);

  json facts;
  facts["fact1"] = json{{"slope", slope},
                        {"spearman", rho},
                        {"null_bands", bands},
                        {"pass", slope < 0.0 && rho < 0.0 && outside_all_shuffle_bands}};
  facts["fact2"] = json{{"sample", "ubiquity"},
                        {"ranking", ranking_json(ub_ranking)},
                        {"pass", worst_is_normal(ub_ranking)}};
  facts["fact3"] = json{{"sample", "diversification"},
                        {"ranking", ranking_json(div_ranking)},
                        {"pass", worst_is_normal(div_ranking)}};
  facts["fact4"] = json{{"sample", "proximity"},
                        {"ranking", ranking_json(prox_ranking)},
                        {"excluded_zeros", prox_ranking.excluded},
                        {"pass", best_is_weibull(prox_ranking) && worst_is_normal(prox_ranking)}};

  json calibration = nullptr;
  const fs::path result_path = dir / "result.json";
  if (fs::exists(result_path)) {
    std::ifstream in(result_path);
    const json result = json::parse(in);
    capnet::BinomialParams params{result.at("chosen").at("r").get<double>(),
                                  result.at("chosen").at("q").get<double>(),
                                  result.at("chosen").at("na").get<std::size_t>(),
                                  density.at("countries").get<std::size_t>(),
                                  density.at("products").get<std::size_t>()};
    const double nc = static_cast<double>(params.n_countries);
    const double np = static_cast<double>(params.n_products);
    std::vector<double> u, v;
    for (const auto& [k0, k1] : country_points) u.push_back(k0 / np);
    for (const auto& [k0, k1] : product_points) v.push_back(k0 / nc);
    const capnet::DensityCurve div_curve = capnet::diversification_pdf(params);
    const capnet::DensityCurve ub_curve = capnet::ubiquity_pdf(params);
    const double ks_div = capnet::ks_statistic(
        capnet::make_sample(u), [&](double x) { return div_curve.cdf_at(x); });
    const double ks_ub = capnet::ks_statistic(
        capnet::make_sample(v), [&](double x) { return ub_curve.cdf_at(x); });
    calibration = json{{"na", params.n_capabilities}, {"r", params.r},
                       {"q", params.q},              {"ks_ubiquity", ks_ub},
                       {"ks_diversification", ks_div}, {"hetero_ks", result.at("hetero").at("ks")}};
    run.note_input(result_path);
  }

  json report{{"facts", facts}, {"density", density}, {"calibration", calibration}};
  run.write_json("report.json", report);

  std::ostringstream text;
  text << "Stylized facts\n";
  text << "  1 diversification vs mean ubiquity: log-log slope " << capnet::format_double(slope)
       << ", spearman " << capnet::format_double(rho) << ", outside shuffle-model bands: "
       << (outside_all_shuffle_bands ? "yes" : "no") << "  ["
       << (facts["fact1"]["pass"].get<bool>() ? "PASS" : "FAIL") << "]\n";
  auto ranking_line = [&](const char* label, const json& fact) {
    text << "  " << label << " ranking:";
    for (const auto& f : fact["ranking"]) text << ' ' << f.get<std::string>();
    text << "  [" << (fact["pass"].get<bool>() ? "PASS" : "FAIL") << "]\n";
  };
  ranking_line("2 ubiquity distribution", facts["fact2"]);
  ranking_line("3 diversification distribution", facts["fact3"]);
  ranking_line("4 proximity distribution", facts["fact4"]);
  text << "Density\n  " << density.at("countries").get<std::size_t>() << " x "
       << density.at("products").get<std::size_t>() << ", edges "
       << density.at("edges").get<std::size_t>() << ", density "
       << capnet::format_double(density.at("density").get<double>()) << "\n";
  text << "Calibration\n";
  if (calibration.is_null()) {
    text << "  not run\n";
  } else {
    text << "  N_a " << calibration["na"].get<std::size_t>() << ", r "
         << capnet::format_double(calibration["r"].get<double>()) << ", q "
         << capnet::format_double(calibration["q"].get<double>()) << ", KS ubiquity "
         << capnet::format_double(calibration["ks_ubiquity"].get<double>())
         << ", KS diversification "
         << capnet::format_double(calibration["ks_diversification"].get<double>()) << "\n";
  }
  run.write_text("report.txt", text.str());
  run.finish();
}

void emit_error(const std::string& type, const std::string& message) {
  std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capnet: country-product export network analysis and the capabilities model"};
  app.require_subcommand(1);

  IngestOptions ingest_opt;
  auto* ingest = app.add_subcommand("ingest", "Parse and aggregate trade records");
  ingest->add_option("--input", ingest_opt.input, "Trade CSV (country,product,value[,year])");
  ingest->add_option("--year", ingest_opt.year, "Keep only records of this year");
  ingest->add_flag("--synthetic", ingest_opt.synthetic, "Generate planted-model trade data");
  ingest->add_option("--countries", ingest_opt.countries, "Synthetic: number of countries");
  ingest->add_option("--products", ingest_opt.products, "Synthetic: number of products");
  ingest->add_option("--na", ingest_opt.n_caps, "Synthetic: number of capabilities");
  ingest->add_option("--r", ingest_opt.r, "Synthetic: capability probability");
  ingest->add_option("--q", ingest_opt.q, "Synthetic: requirement probability");
  ingest->add_option("--seed", ingest_opt.seed, "Synthetic: random seed");
  ingest->add_option("--out", ingest_opt.out, "Output directory");
  ingest->add_flag("--force", ingest_opt.force, "Overwrite existing outputs");
  ingest->callback([&] { run_ingest(ingest_opt); });

  RcaOptions rca_opt;
  auto* rca = app.add_subcommand("rca", "Compute revealed comparative advantage");
  rca->add_option("--table", rca_opt.table, "Export table CSV")->required();
  rca->add_flag("--log10", rca_opt.log10, "Also emit log10 RCA matrix");
  rca->add_option("--out", rca_opt.out, "Output directory");
  rca->add_flag("--force", rca_opt.force, "Overwrite existing outputs");
  rca->callback([&] { run_rca(rca_opt); });

  MatrixOptions matrix_opt;
  auto* matrix = app.add_subcommand("matrix", "Threshold RCA into the bipartite network");
  matrix->add_option("--rca", matrix_opt.rca, "RCA matrix CSV")->required();
  matrix->add_option("--threshold", matrix_opt.threshold, "RCA threshold R*")->required();
  matrix->add_flag("--edge-list", matrix_opt.edge_list, "Also emit edge list CSV");
  matrix->add_flag("--triangular", matrix_opt.triangular, "Also emit degree-sorted matrix");
  matrix->add_option("--out", matrix_opt.out, "Output directory");
  matrix->add_flag("--force", matrix_opt.force, "Overwrite existing outputs");
  matrix->callback([&] { run_matrix(matrix_opt); });

  MetricsOptions metrics_opt;
  auto* metrics = app.add_subcommand("metrics", "Degrees, proximity and density");
  metrics->add_option("--matrix", metrics_opt.matrix, "Adjacency matrix CSV")->required();
  metrics->add_option("--out", metrics_opt.out, "Output directory");
  metrics->add_flag("--force", metrics_opt.force, "Overwrite existing outputs");
  metrics->callback([&] { run_metrics(metrics_opt); });

  NullModelOptions null_opt;
  auto* nullmodel = app.add_subcommand("nullmodel", "Randomized ensemble diagrams");
  nullmodel->add_option("--matrix", null_opt.matrix, "Adjacency matrix CSV")->required();
  nullmodel->add_option("--model", null_opt.model, "Null model 1-4")->required();
  nullmodel->add_option("--replicates", null_opt.replicates, "Ensemble size")->required();
  nullmodel->add_option("--seed", null_opt.seed, "Master seed");
  nullmodel->add_option("--swap-factor", null_opt.swap_factor,
                        "NM4: swap attempts per edge (default 100)");
  nullmodel->add_option("--out", null_opt.out, "Output directory");
  nullmodel->add_flag("--force", null_opt.force, "Overwrite existing outputs");
  nullmodel->callback([&] { run_nullmodel(null_opt); });

  FitDistOptions fit_opt;
  auto* fitdist = app.add_subcommand("fitdist", "Maximum-likelihood distribution fits");
  fitdist->add_option("--input", fit_opt.input, "CSV with a 'value' column")->required();
  fitdist->add_option("--families", fit_opt.families,
                      "Comma list of normal,lognormal,weibull (default all)");
  fitdist->add_flag("--weighted-ks", fit_opt.weighted_ks, "Report sqrt(F(1-F))-weighted KS");
  fitdist->add_option("--out", fit_opt.out, "Output directory");
  fitdist->add_flag("--force", fit_opt.force, "Overwrite existing outputs");
  fitdist->callback([&] { run_fitdist(fit_opt); });

  ModelOptions model_opt;
  auto* model = app.add_subcommand("model", "Capabilities model");
  model->require_subcommand(1);
  auto* simulate = model->add_subcommand("simulate", "Sample a world and its network");
  auto* analytic = model->add_subcommand("analytic", "Closed-form curves and densities");
  for (auto* sub : {simulate, analytic}) {
    sub->add_option("--countries", model_opt.countries, "Number of countries");
    sub->add_option("--products", model_opt.products, "Number of products");
    sub->add_option("--na", model_opt.n_caps, "Number of capabilities")->required();
    sub->add_option("--r", model_opt.r, "Capability probability");
    sub->add_option("--q", model_opt.q, "Requirement probability")->required();
    sub->add_option("--out", model_opt.out, "Output directory");
    sub->add_flag("--force", model_opt.force, "Overwrite existing outputs");
  }
  simulate->add_option("--seed", model_opt.seed, "Random seed");
  simulate->add_option("--rc-file", model_opt.rc_file, "CSV with per-country 'r_c' column");
  analytic->add_option("--points", model_opt.points, "Curve grid points (default 200)");
  analytic->add_flag("--derivative-checks", model_opt.derivative_checks,
                     "Also emit derivative check report");
  simulate->callback([&] { run_model_simulate(model_opt); });
  analytic->callback([&] { run_model_analytic(model_opt); });

  QuiescenceOptions quiescence_opt;
  auto* quiescence = app.add_subcommand("quiescence", "Capability-to-product fraction curve");
  quiescence->add_option("--na", quiescence_opt.n_caps, "Number of capabilities")->required();
  quiescence->add_option("--q", quiescence_opt.q, "Requirement probability")->required();
  quiescence->add_option("--points", quiescence_opt.points, "Grid points (default 200)");
  quiescence->add_option("--out", quiescence_opt.out, "Output directory");
  quiescence->add_flag("--force", quiescence_opt.force, "Overwrite existing outputs");
  quiescence->callback([&] { run_quiescence(quiescence_opt); });

  CalibrateOptions cal_opt;
  auto* calibrate = app.add_subcommand("calibrate", "Fit the model to an empirical network");
  calibrate->add_option("--matrix", cal_opt.matrix, "Adjacency matrix CSV")->required();
  calibrate->add_option("--r-min", cal_opt.r_min, "Grid: min r (default 0.50)");
  calibrate->add_option("--r-max", cal_opt.r_max, "Grid: max r (default 0.98)");
  calibrate->add_option("--r-step", cal_opt.r_step, "Grid: r step (default 0.02)");
  calibrate->add_option("--na-min", cal_opt.na_min, "Grid: min N_a (default 10)");
  calibrate->add_option("--na-max", cal_opt.na_max, "Grid: max N_a (default 200)");
  calibrate->add_option("--na-step", cal_opt.na_step, "Grid: N_a step (default 5)");
  calibrate->add_option("--seeds-per-cell", cal_opt.seeds_per_cell,
                        "Simulated worlds pooled per cell (default 5)");
  calibrate->add_option("--seed", cal_opt.seed, "Master seed");
  calibrate->add_option("--r2-quantile", cal_opt.r2_quantile, "Top R2 share (default 0.10)");
  calibrate->add_option("--ks-quantile", cal_opt.ks_quantile, "Bottom KS share (default 0.10)");
  calibrate->add_option("--hetero-replicates", cal_opt.hetero_replicates,
                        "Heterogeneous refit replicates (default 1000)");
  calibrate->add_option("--threads", cal_opt.threads, "Worker threads (default: all cores)");
  calibrate->add_option("--out", cal_opt.out, "Output directory");
  calibrate->add_flag("--force", cal_opt.force, "Overwrite existing outputs");
  calibrate->callback([&] { run_calibrate(cal_opt); });

  ReportOptions report_opt;
  auto* report = app.add_subcommand("report", "Assemble stylized-fact verdicts from a run directory");
  report->add_option("--run", report_opt.run_dir, "Directory with prior outputs")->required();
  report->add_option("--out", report_opt.out, "Output directory (default: the run directory)");
  report->add_flag("--force", report_opt.force, "Overwrite existing outputs");
  report->callback([&] { run_report(report_opt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help() << '\n';
    emit_error("usage", e.what());
    return 2;
  } catch (const capnet::validation_error& e) {
    emit_error("validation", e.what());
    return 3;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return 1;
  }
  return 0;
}
