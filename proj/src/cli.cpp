#include "mixvar/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "mixvar/backtest.hpp"
#include "mixvar/baselines.hpp"
#include "mixvar/errors.hpp"
#include "mixvar/json_io.hpp"
#include "mixvar/mixture.hpp"
#include "mixvar/returns.hpp"
#include "mixvar/var.hpp"
#include "mixvar/version.hpp"

namespace mixvar::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string date_col = "Date";
  std::string price_col = "Close";
  std::string returns_col;  // non-empty switches to pre-computed-returns mode
  std::string date_format = "%Y-%m-%d";
  std::string family = "all";
  int g = 0;  // 0 = select by BIC over 1..g_max
  int g_max = 4;
  std::vector<double> alphas = {0.01, 0.05};
  int window = 250;
  std::string method = "cdf";
  std::size_t n_sim = 1'000'000;
  std::uint64_t seed = 12345;
  int n_starts = 5;
  int max_iter = 500;
  double tol = 1e-6;
  std::string init = "kmeans";
  std::string out_dir;
  int bins = 40;
  int threads = 0;
  double grid_max = 0.10;
  double grid_step = 0.001;
};

constexpr std::uint64_t kCmdTagStats = 1;
constexpr std::uint64_t kCmdTagFit = 2;
constexpr std::uint64_t kCmdTagVar = 3;
constexpr std::uint64_t kCmdTagBacktest = 4;

std::uint64_t family_tag(Family f) { return static_cast<std::uint64_t>(f) + 1; }

std::vector<Family> requested_families(const std::string& spec) {
  if (spec == "all") return {Family::MMW, Family::GMM, Family::TMM};
  return {family_from_string(spec)};
}

json config_json(const RunConfig& cfg) {
  json doc;
  doc["subcommand"] = cfg.subcommand;
  doc["input"] = cfg.input;
  doc["date_col"] = cfg.date_col;
  doc["price_col"] = cfg.price_col;
  doc["returns_col"] = cfg.returns_col;
  doc["date_format"] = cfg.date_format;
  doc["family"] = cfg.family;
  doc["g"] = cfg.g;
  doc["g_max"] = cfg.g_max;
  doc["alphas"] = cfg.alphas;
  doc["window"] = cfg.window;
  doc["method"] = cfg.method;
  doc["n_sim"] = cfg.n_sim;
  doc["seed"] = cfg.seed;
  doc["n_starts"] = cfg.n_starts;
  doc["max_iter"] = cfg.max_iter;
  doc["tol"] = cfg.tol;
  doc["init"] = cfg.init;
  doc["out_dir"] = cfg.out_dir;
  doc["bins"] = cfg.bins;
  doc["threads"] = cfg.threads;
  doc["grid_max"] = cfg.grid_max;
  doc["grid_step"] = cfg.grid_step;
  return doc;
}

struct LoadedInput {
  ReturnSeries returns;
  std::string content_hash;
};

LoadedInput load_input(const RunConfig& cfg) {
  std::ifstream in(cfg.input, std::ios::binary);
  if (!in) throw SchemaError("cannot open input file '" + cfg.input + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();

  LoadedInput out;
  out.content_hash = fnv1a64_hex(bytes);
  std::istringstream stream(bytes);
  if (!cfg.returns_col.empty()) {
    out.returns = load_returns(stream, {cfg.date_col, cfg.returns_col, cfg.date_format});
  } else {
    const PriceSeries prices =
        load_prices(stream, {cfg.date_col, cfg.price_col, cfg.date_format});
    out.returns = log_returns(prices);
  }
  return out;
}

json meta_json(const RunConfig& cfg, const std::string& content_hash) {
  json meta;
  meta["artifact_version"] = kVersion;
  meta["seed"] = cfg.seed;
  meta["input_hash"] = content_hash;
  meta["config"] = config_json(cfg);
  return meta;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

void write_json_file(const fs::path& path, const json& doc) {
  write_text(path, doc.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
  return fs::path(cfg.out_dir) / name;
}

std::string fmt(double v, const char* format = "%.12g") {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string alpha_key(double alpha) { return fmt(alpha, "%g"); }

EMConfig em_config(const RunConfig& cfg, std::uint64_t cmd_tag, Family family) {
  EMConfig em;
  em.g = cfg.g > 0 ? cfg.g : 2;
  em.max_iter = cfg.max_iter;
  em.tol = cfg.tol;
  em.init = init_method_from_string(cfg.init);
  em.n_starts = cfg.n_starts;
  em.seed = derive_seed(cfg.seed, cmd_tag, family_tag(family));
  return em;
}

std::vector<int> g_candidates(const RunConfig& cfg) {
  std::vector<int> gs;
  for (int g = 1; g <= cfg.g_max; ++g) gs.push_back(g);
  return gs;
}

/// Fit results for every requested family, stored side by side so the
/// commands can emit comparable reports.
struct FittedFamilies {
  std::optional<FitResult> mmw;
  std::optional<GmmFitResult> gmm;
  std::optional<TmmFitResult> tmm;
  std::vector<std::string> failures;

  bool any() const { return mmw || gmm || tmm; }
};

FittedFamilies fit_families(const ReturnSeries& returns, const RunConfig& cfg,
                            std::uint64_t cmd_tag) {
  FittedFamilies out;
  const std::vector<int> gs = g_candidates(cfg);
  for (const Family family : requested_families(cfg.family)) {
    const EMConfig em = em_config(cfg, cmd_tag, family);
    try {
      switch (family) {
        case Family::MMW:
          out.mmw = cfg.g > 0 ? fit_em(returns, em) : select_g(returns, gs, em);
          break;
        case Family::GMM:
          out.gmm = cfg.g > 0 ? fit_gmm(returns, em)
                              : select_g_gmm(returns.values, gs, em);
          break;
        case Family::TMM:
          out.tmm = cfg.g > 0 ? fit_tmm(returns, em)
                              : select_g_tmm(returns.values, gs, em);
          break;
      }
    } catch (const std::exception& e) {
      out.failures.push_back(to_string(family) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

int cmd_stats(const RunConfig& cfg) {
  const LoadedInput input = load_input(cfg);
  const SummaryStats stats = summary_stats(input.returns);

  std::cout << "summary statistics (" << to_string(input.returns.frequency)
            << " log returns, percent)\n";
  const auto row = [](const char* name, double v) {
    std::cout << "  " << std::left << std::setw(10) << name << std::right << std::setw(12)
              << std::fixed << std::setprecision(2) << v << "\n";
  };
  row("minimum", stats.min);
  row("maximum", stats.max);
  row("mean", stats.mean);
  row("std. dev.", stats.std_dev);
  row("skewness", stats.skewness);
  row("kurtosis", stats.kurtosis);
  std::cout << "  n         " << std::setw(12) << stats.n << "\n";
  std::cout.unsetf(std::ios::fixed);

  json doc;
  doc["meta"] = meta_json(cfg, input.content_hash);
  doc["frequency"] = to_string(input.returns.frequency);
  doc["stats"] = to_json(stats);
  write_json_file(out_path(cfg, "stats.json"), doc);
  return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

void write_density_curves(const RunConfig& cfg, const ReturnSeries& returns,
                          const FittedFamilies& fits) {
  const auto [min_it, max_it] =
      std::minmax_element(returns.values.begin(), returns.values.end());
  const double range = *max_it - *min_it;
  const double pad = range > 0.0 ? 0.05 * range : 1.0;
  const double lo = *min_it - pad;
  const double hi = *max_it + pad;
  const int n_points = 401;

  std::ostringstream curve;
  curve << "x";
  if (fits.mmw) curve << ",dens_mmw";
  if (fits.gmm) curve << ",dens_gmm";
  if (fits.tmm) curve << ",dens_tmm";
  curve << "\n";
  for (int k = 0; k < n_points; ++k) {
    const double x = lo + (hi - lo) * k / (n_points - 1);
    curve << fmt(x);
    if (fits.mmw) curve << "," << fmt(fits.mmw->model.pdf(x));
    if (fits.gmm) curve << "," << fmt(fits.gmm->model.pdf(x));
    if (fits.tmm) curve << "," << fmt(fits.tmm->model.pdf(x));
    curve << "\n";
  }
  write_text(out_path(cfg, "fit_density.csv"), curve.str());
  std::cout << "wrote " << out_path(cfg, "fit_density.csv").string() << "\n";

  // histogram of the data on the same axis, density-normalized
  const int bins = std::max(1, cfg.bins);
  std::vector<int> counts(bins, 0);
  const double width = (hi - lo) / bins;
  for (const double v : returns.values) {
    int b = static_cast<int>((v - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++counts[b];
  }
  std::ostringstream hist;
  hist << "bin_left,bin_right,count,density\n";
  for (int b = 0; b < bins; ++b) {
    const double left = lo + b * width;
    hist << fmt(left) << "," << fmt(left + width) << "," << counts[b] << ","
         << fmt(counts[b] / (returns.values.size() * width)) << "\n";
  }
  write_text(out_path(cfg, "fit_histogram.csv"), hist.str());
  std::cout << "wrote " << out_path(cfg, "fit_histogram.csv").string() << "\n";
}

int cmd_fit(const RunConfig& cfg) {
  const LoadedInput input = load_input(cfg);
  const FittedFamilies fits = fit_families(input.returns, cfg, kCmdTagFit);

  const json meta = meta_json(cfg, input.content_hash);
  auto emit = [&](const auto& fit) {
    json doc = model_to_json(fit);
    doc["meta"] = meta;
    const std::string name = "model_" + doc["family"].get<std::string>() + ".json";
    write_json_file(out_path(cfg, name), doc);
    std::cout << "  " << doc["family"].get<std::string>() << ": g=" << fit.model.g()
              << " loglik=" << fmt(fit.loglik(), "%.4f") << " bic=" << fmt(fit.bic, "%.4f")
              << (fit.converged ? "" : " (not converged)") << "\n";
  };
  if (fits.mmw) emit(*fits.mmw);
  if (fits.gmm) emit(*fits.gmm);
  if (fits.tmm) emit(*fits.tmm);
  for (const std::string& failure : fits.failures) {
    std::cerr << "fit failed for " << failure << "\n";
  }
  if (!fits.any()) {
    std::cerr << "all requested families failed\n";
    return 1;
  }
  write_density_curves(cfg, input.returns, fits);
  return 0;
}

// ---------------------------------------------------------------------------
// var
// ---------------------------------------------------------------------------

int cmd_var(const RunConfig& cfg) {
  const LoadedInput input = load_input(cfg);
  for (const double alpha : cfg.alphas) {
    VaRRequest req;
    req.alpha = alpha;
    validate(req);
  }
  const FittedFamilies fits = fit_families(input.returns, cfg, kCmdTagVar);
  if (!fits.any()) {
    std::cerr << "all requested families failed\n";
    return 1;
  }

  json estimates;
  std::size_t alpha_ix = 0;
  auto add_model = [&](const auto& fit, Family family) {
    const std::string key = to_string(family);
    alpha_ix = 0;
    for (const double alpha : cfg.alphas) {
      const VaREstimate cdf_est = model_var_cdf(fit.model, alpha);
      const VaREstimate sim_est = model_var_sim(
          fit.model, alpha, cfg.n_sim,
          derive_seed(cfg.seed, kCmdTagVar, family_tag(family), alpha_ix));
      estimates[key][alpha_key(alpha)][to_string(cdf_est.method)] = to_json(cdf_est);
      estimates[key][alpha_key(alpha)][to_string(sim_est.method)] = to_json(sim_est);
      ++alpha_ix;
    }
  };
  if (fits.mmw) add_model(*fits.mmw, Family::MMW);
  if (fits.gmm) add_model(*fits.gmm, Family::GMM);
  if (fits.tmm) add_model(*fits.tmm, Family::TMM);
  for (const double alpha : cfg.alphas) {
    estimates["historical"][alpha_key(alpha)]["historical"] =
        to_json(historical_var(input.returns, alpha));
  }

  json doc;
  doc["meta"] = meta_json(cfg, input.content_hash);
  doc["var_estimates"] = estimates;
  write_json_file(out_path(cfg, "var_summary.json"), doc);

  // table on stdout
  std::cout << std::left << std::setw(12) << "family" << std::setw(8) << "alpha"
            << std::setw(14) << "var(cdf)" << std::setw(14) << "var(sim)" << "\n";
  auto print_rows = [&](const std::string& key) {
    if (!estimates.contains(key)) return;
    for (const double alpha : cfg.alphas) {
      const auto& at = estimates[key][alpha_key(alpha)];
      std::cout << std::left << std::setw(12) << key << std::setw(8) << alpha_key(alpha);
      if (at.contains("cdf-bisection")) {
        std::cout << std::setw(14) << fmt(at["cdf-bisection"]["value"].get<double>(), "%.4f");
      } else {
        std::cout << std::setw(14) << "-";
      }
      if (at.contains("simulation")) {
        std::cout << std::setw(14) << fmt(at["simulation"]["value"].get<double>(), "%.4f");
      } else if (at.contains("historical")) {
        std::cout << std::setw(14) << fmt(at["historical"]["value"].get<double>(), "%.4f");
      }
      std::cout << "\n";
    }
  };
  print_rows("mmw");
  print_rows("gmm");
  print_rows("tmm");
  print_rows("historical");

  // VaR-vs-alpha curve over the configurable grid (cdf method)
  std::ostringstream curve;
  curve << "alpha";
  if (fits.mmw) curve << ",var_mmw";
  if (fits.gmm) curve << ",var_gmm";
  if (fits.tmm) curve << ",var_tmm";
  curve << ",var_hist\n";
  const std::size_t n_obs = input.returns.size();
  for (double alpha = cfg.grid_step; alpha <= cfg.grid_max + 1e-12; alpha += cfg.grid_step) {
    curve << fmt(alpha, "%.6g");
    if (fits.mmw) curve << "," << fmt(model_var_cdf(fits.mmw->model, alpha).value);
    if (fits.gmm) curve << "," << fmt(model_var_cdf(fits.gmm->model, alpha).value);
    if (fits.tmm) curve << "," << fmt(model_var_cdf(fits.tmm->model, alpha).value);
    if (n_obs >= static_cast<std::size_t>(std::ceil(1.0 / alpha))) {
      curve << "," << fmt(historical_var(input.returns, alpha).value);
    } else {
      curve << ",";
    }
    curve << "\n";
  }
  write_text(out_path(cfg, "var_curve.csv"), curve.str());
  std::cout << "wrote " << out_path(cfg, "var_curve.csv").string() << "\n";

  for (const std::string& failure : fits.failures) {
    std::cerr << "fit failed for " << failure << "\n";
  }
  return fits.failures.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// backtest
// ---------------------------------------------------------------------------

int cmd_backtest(const RunConfig& cfg) {
  const LoadedInput input = load_input(cfg);
  for (const double alpha : cfg.alphas) {
    VaRRequest req;
    req.alpha = alpha;
    validate(req);
  }

  const std::vector<Family> families = requested_families(cfg.family);
  const json meta = meta_json(cfg, input.content_hash);
  int failures = 0;

  for (const double alpha : cfg.alphas) {
    // forecast CSV columns are fixed; families not requested stay empty
    std::map<Family, RollingForecast> forecasts;
    for (const Family family : families) {
      RollingConfig rcfg;
      rcfg.family = family;
      rcfg.alpha = alpha;
      rcfg.window = cfg.window;
      rcfg.em = em_config(cfg, kCmdTagBacktest, family);
      rcfg.g_range = cfg.g > 0 ? std::vector<int>{} : g_candidates(cfg);
      rcfg.method = var_method_from_string(cfg.method);
      rcfg.n_sim = cfg.n_sim;
      rcfg.n_threads = cfg.threads;
      try {
        const RollingForecast fc = rolling_forecast(input.returns, rcfg);
        const BacktestReport report = score_forecasts(fc, input.returns);
        json doc = to_json(report);
        doc["meta"] = meta;
        const std::string name =
            "backtest_" + to_string(family) + "_a" + alpha_key(alpha) + ".json";
        write_json_file(out_path(cfg, name), doc);
        std::cout << "  " << to_string(family) << " alpha=" << alpha_key(alpha)
                  << ": exceedances " << report.n_exceed << "/" << report.n_obs
                  << ", kupiec p=" << fmt(report.kupiec.p_value, "%.4f")
                  << (report.kupiec.passed_at_5pct() ? " (pass)" : " (fail)")
                  << ", independence "
                  << (report.christoffersen.applicable
                          ? "p=" + fmt(report.christoffersen.p_value, "%.4f") +
                                (report.christoffersen.passed_at_5pct() ? " (pass)"
                                                                        : " (fail)")
                          : std::string("n/a"))
                  << ", mse=" << fmt(report.mse, "%.4f") << "\n";
        forecasts.emplace(family, fc);
      } catch (const std::exception& e) {
        std::cerr << "backtest failed for " << to_string(family)
                  << " alpha=" << alpha_key(alpha) << ": " << e.what() << "\n";
        ++failures;
      }
    }
    if (forecasts.empty()) continue;

    // companion CSV: date, realized, var_gmm, var_tmm, var_mmw, var_hist
    const RollingForecast& first = forecasts.begin()->second;
    std::ostringstream csv;
    csv << "date,realized,var_gmm,var_tmm,var_mmw,var_hist\n";
    for (std::size_t i = 0; i < first.points.size(); ++i) {
      csv << first.points[i].date.to_string() << "," << fmt(first.points[i].realized);
      for (const Family f : {Family::GMM, Family::TMM, Family::MMW}) {
        const auto it = forecasts.find(f);
        csv << ",";
        if (it != forecasts.end() && it->second.points[i].ok) {
          csv << fmt(it->second.points[i].model_var);
        }
      }
      csv << "," << fmt(first.points[i].hist_var) << "\n";
    }
    const fs::path csv_path = out_path(cfg, "backtest_forecasts_a" + alpha_key(alpha) + ".csv");
    write_text(csv_path, csv.str());
    std::cout << "wrote " << csv_path.string() << "\n";
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  RunConfig cfg;
  if (const char* env_out = std::getenv("MIXVAR_OUT")) cfg.out_dir = env_out;
  if (cfg.out_dir.empty()) cfg.out_dir = ".";

  CLI::App app{"mixture-model Value-at-Risk toolkit"};
  app.require_subcommand(1);

  auto add_input_options = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input, "input CSV path")->required();
    sub->add_option("--date-col", cfg.date_col, "date column name");
    sub->add_option("--price-col", cfg.price_col, "adjusted close column name");
    sub->add_option("--returns-col", cfg.returns_col,
                    "column holding pre-computed returns (skips the log transform)");
    sub->add_option("--date-format", cfg.date_format, "std::get_time date format");
    sub->add_option("--out", cfg.out_dir, "output directory (default $MIXVAR_OUT or .)");
    sub->add_option("--seed", cfg.seed, "root seed for all randomness");
  };
  std::string g_spec = "auto";
  auto add_model_options = [&](CLI::App* sub) {
    sub->add_option("--family", cfg.family, "mmw|gmm|tmm|all")
        ->check(CLI::IsMember({"mmw", "gmm", "tmm", "all"}));
    sub->add_option("--g", g_spec, "fixed component count, or 'auto' to select by BIC");
    sub->add_option("--g-max", cfg.g_max, "largest g for BIC selection")
        ->check(CLI::Range(1, 16));
    sub->add_option("--n-starts", cfg.n_starts, "EM starts per fit");
    sub->add_option("--max-iter", cfg.max_iter, "EM iteration cap");
    sub->add_option("--tol", cfg.tol, "EM log-likelihood tolerance");
    sub->add_option("--init", cfg.init, "kmeans|quantile-split|random")
        ->check(CLI::IsMember({"kmeans", "quantile-split", "random"}));
  };

  CLI::App* stats = app.add_subcommand("stats", "summary statistics of the return series");
  add_input_options(stats);

  CLI::App* fit = app.add_subcommand("fit", "fit mixture models; emit model JSON and plot data");
  add_input_options(fit);
  add_model_options(fit);
  fit->add_option("--bins", cfg.bins, "histogram bin count");

  CLI::App* var = app.add_subcommand("var", "VaR estimates and VaR-vs-alpha curves");
  add_input_options(var);
  add_model_options(var);
  var->add_option("--alpha", cfg.alphas, "tail probabilities (repeatable)");
  var->add_option("--n-sim", cfg.n_sim, "simulation draws");
  var->add_option("--grid-max", cfg.grid_max, "alpha curve upper end");
  var->add_option("--grid-step", cfg.grid_step, "alpha curve step");

  CLI::App* backtest =
      app.add_subcommand("backtest", "rolling one-day-ahead VaR forecasts and tests");
  add_input_options(backtest);
  add_model_options(backtest);
  backtest->add_option("--alpha", cfg.alphas, "tail probabilities (repeatable)");
  backtest->add_option("--window", cfg.window, "rolling window length");
  backtest->add_option("--method", cfg.method, "cdf|sim model VaR method")
      ->check(CLI::IsMember({"cdf", "sim"}));
  backtest->add_option("--n-sim", cfg.n_sim, "simulation draws (method=sim)");
  backtest->add_option("--threads", cfg.threads, "worker threads (0 = auto)");

  std::vector<std::string> argv = args;
  std::reverse(argv.begin(), argv.end());  // CLI11 parses reversed vectors
  try {
    app.parse(argv);
    if (g_spec == "auto" || g_spec == "0") {
      cfg.g = 0;
    } else {
      cfg.g = std::stoi(g_spec);
      if (cfg.g < 1 || std::to_string(cfg.g) != g_spec) {
        throw std::invalid_argument("--g expects a positive integer or 'auto'");
      }
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (stats->parsed()) {
      cfg.subcommand = "stats";
      return cmd_stats(cfg);
    }
    if (fit->parsed()) {
      cfg.subcommand = "fit";
      return cmd_fit(cfg);
    }
    if (var->parsed()) {
      cfg.subcommand = "var";
      return cmd_var(cfg);
    }
    if (backtest->parsed()) {
      cfg.subcommand = "backtest";
      return cmd_backtest(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace mixvar::cli
