// Acceptance suite: one self-contained check per criterion, one printed
// pass/fail line each. Exit code is the number of failed criteria.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mixvar/backtest.hpp"
#include "mixvar/baselines.hpp"
#include "mixvar/cli.hpp"
#include "mixvar/mixture.hpp"
#include "mixvar/returns.hpp"
#include "mixvar/var.hpp"
#include "support/backtest_oracles.hpp"
#include "support/gridsearch.hpp"
#include "support/quadrature.hpp"

using namespace mixvar;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  enum class Status { Pass, Fail, Skip } status = Status::Pass;
  std::string detail;

  static Outcome pass(std::string d = "") { return {Status::Pass, std::move(d)}; }
  static Outcome fail(std::string d) { return {Status::Fail, std::move(d)}; }
  static Outcome skip(std::string d) { return {Status::Skip, std::move(d)}; }
};

const MMWMixture kTwoComponentTruth{{0.4, 0.6}, {{4.0, 1.5}, {12.0, 6.0}}, 5.0};

std::vector<double> sample_mmw(const MMWMixture& m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) x = m.sample_one(rng);
  return out;
}

MMWMixture sorted_by_shape(MMWMixture m) {
  std::vector<std::size_t> order(m.components.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return m.components[a].shape < m.components[b].shape;
  });
  MMWMixture out = m;
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.weights[i] = m.weights[order[i]];
    out.components[i] = m.components[order[i]];
  }
  return out;
}

bool trace_monotone(const std::vector<double>& trace) {
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace[k] < trace[k - 1] - 1e-8) return false;
  }
  return true;
}

/// Runs `total` independent jobs on two workers; job results land in
/// caller-owned slots so the outcome does not depend on scheduling.
void run_jobs(std::size_t total, const std::function<void(std::size_t)>& job) {
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      job(i);
    }
  };
  std::thread t1(worker), t2(worker);
  t1.join();
  t2.join();
}

// ---------------------------------------------------------------------------
// criterion 1: EM ascent on 100 seeded synthetic datasets, all families
// ---------------------------------------------------------------------------

MMWMixture random_generator_model(int g_true, Rng& rng) {
  MMWMixture m;
  m.c = 5.0;
  double total = 0.0;
  for (int i = 0; i < g_true; ++i) {
    const double w = 1.0 + rng.u01();
    m.weights.push_back(w);
    total += w;
    // multiplicatively spread scales keep the components distinguishable
    m.components.push_back({(2.0 + 2.5 * rng.u01()) * (i + 1), 1.0 + 5.5 * rng.u01()});
  }
  for (double& w : m.weights) w /= total;
  return m;
}

Outcome criterion_ascent() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> failures(100);
  run_jobs(100, [&](std::size_t ds) {
    const int g_true = 1 + static_cast<int>(ds % 3);
    Rng gen_rng(derive_seed(1000, ds));
    const MMWMixture truth = random_generator_model(g_true, gen_rng);
    const std::vector<double> xs = sample_mmw(truth, 1000, derive_seed(1001, ds));

    EMConfig cfg;
    cfg.g = g_true;
    cfg.n_starts = 1;
    cfg.seed = derive_seed(1002, ds);
    try {
      if (!trace_monotone(fit_em(xs, cfg).loglik_trace)) {
        failures[ds] = "mmw trace decreased";
        return;
      }
      if (!trace_monotone(fit_gmm(xs, cfg).loglik_trace)) {
        failures[ds] = "gmm trace decreased";
        return;
      }
      if (!trace_monotone(fit_tmm(xs, cfg).loglik_trace)) {
        failures[ds] = "tmm trace decreased";
        return;
      }
    } catch (const std::exception& e) {
      failures[ds] = std::string("dataset fit failed: ") + e.what();
    }
  });
  for (std::size_t ds = 0; ds < failures.size(); ++ds) {
    if (!failures[ds].empty()) {
      return Outcome::fail("dataset " + std::to_string(ds) + ": " + failures[ds]);
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > 120.0) {
    return Outcome::fail("runtime " + std::to_string(secs) + " s exceeds 2 min");
  }
  return Outcome::pass("300 traces monotone within 1e-8");
}

// ---------------------------------------------------------------------------
// criterion 2: two-component parameter recovery in at least 18 of 20 seeds
// ---------------------------------------------------------------------------

Outcome criterion_recovery() {
  const auto start = std::chrono::steady_clock::now();
  std::atomic<int> hits{0};
  run_jobs(20, [&](std::size_t s) {
    const std::vector<double> xs = sample_mmw(kTwoComponentTruth, 5000, derive_seed(2000, s));
    EMConfig cfg;
    cfg.g = 2;
    cfg.n_starts = 3;
    cfg.seed = derive_seed(2001, s);
    try {
      const MMWMixture m = sorted_by_shape(fit_em(xs, cfg).model);
      const bool ok = std::fabs(m.weights[0] - 0.4) <= 0.05 &&
                      std::fabs(m.weights[1] - 0.6) <= 0.05 &&
                      std::fabs(m.components[0].shape - 1.5) <= 0.15 &&
                      std::fabs(m.components[0].scale - 4.0) <= 0.40 &&
                      std::fabs(m.components[1].shape - 6.0) <= 0.60 &&
                      std::fabs(m.components[1].scale - 12.0) <= 1.20;
      if (ok) hits.fetch_add(1);
    } catch (const std::exception&) {
    }
  });
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string detail = std::to_string(hits.load()) + "/20 seeds recovered";
  if (secs > 60.0) return Outcome::fail("runtime " + std::to_string(secs) + " s exceeds 1 min");
  return hits >= 18 ? Outcome::pass(detail) : Outcome::fail(detail);
}

// ---------------------------------------------------------------------------
// criterion 3: BIC selects the true component count in at least 80% of seeds
// ---------------------------------------------------------------------------

Outcome criterion_bic_selection() {
  const std::vector<int> g_range = {1, 2, 3, 4};
  std::atomic<int> hits_two{0};
  std::atomic<int> hits_one{0};
  run_jobs(40, [&](std::size_t job) {
    const bool two_component = job < 20;
    const std::size_t s = job % 20;
    EMConfig cfg;
    cfg.n_starts = 2;
    cfg.seed = derive_seed(3001, job);
    try {
      if (two_component) {
        const std::vector<double> xs =
            sample_mmw(kTwoComponentTruth, 5000, derive_seed(3000, s));
        if (select_g(xs, g_range, cfg).model.g() == 2) hits_two.fetch_add(1);
      } else {
        const MMWMixture single{{1.0}, {{5.0, 2.0}}, 5.0};
        const std::vector<double> xs = sample_mmw(single, 2000, derive_seed(3002, s));
        if (select_g(xs, g_range, cfg).model.g() == 1) hits_one.fetch_add(1);
      }
    } catch (const std::exception&) {
    }
  });
  const std::string detail = "true g=2 chosen " + std::to_string(hits_two.load()) +
                             "/20, true g=1 chosen " + std::to_string(hits_one.load()) +
                             "/20";
  return (hits_two >= 16 && hits_one >= 16) ? Outcome::pass(detail) : Outcome::fail(detail);
}

// ---------------------------------------------------------------------------
// criterion 4: density mass, quantile round trip, Kolmogorov-Smirnov
// ---------------------------------------------------------------------------

Outcome criterion_distribution() {
  for (const double scale : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    for (const double shape : {0.5, 1.0, 2.0, 4.0, 7.0}) {
      const MirroredWeibullParams p{scale, shape, 4.0};
      const double reach = std::max(60.0 * std::pow(scale, std::max(1.0, 1.0 / shape)),
                                    scale * std::pow(30.0, 1.0 / shape));
      const double mass = testsupport::integrate_split(
          [&](double x) { return mw_pdf(x, p); }, p.c - reach, p.c);
      if (std::fabs(mass - 1.0) > 1e-6) {
        return Outcome::fail("pdf mass " + std::to_string(mass) + " at scale " +
                             std::to_string(scale) + ", shape " + std::to_string(shape));
      }
      for (int k = 1; k < 100; ++k) {
        const double x = p.c - 50.0 * p.scale * k / 100.0;
        const double prob = mw_cdf(x, p);
        if (prob <= 1e-290 || prob >= 1.0) continue;
        if (std::fabs(mw_quantile(prob, p) - x) > 1e-10) {
          return Outcome::fail("round trip off at x " + std::to_string(x));
        }
      }
    }
  }

  // Kolmogorov-Smirnov at n = 1e5 against the closed-form cdf
  const std::size_t n = 100'000;
  const double critical = 1.6276 / std::sqrt(static_cast<double>(n));  // 1% level
  const std::vector<MirroredWeibullParams> settings = {
      {0.5, 0.5, 3.0}, {0.5, 7.0, 3.0}, {1.0, 1.0, 3.0}, {2.0, 1.5, 3.0},
      {2.0, 4.0, 3.0}, {5.0, 0.8, 3.0}, {5.0, 2.5, 3.0}, {10.0, 1.0, 3.0},
      {10.0, 6.0, 3.0}, {4.0, 3.0, 24.0}};
  for (std::size_t i = 0; i < settings.size(); ++i) {
    std::vector<double> xs = mw_sample(settings[i], n, derive_seed(4000, i));
    std::sort(xs.begin(), xs.end());
    double d_stat = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double f = mw_cdf(xs[j], settings[i]);
      d_stat = std::max(d_stat, std::fabs(f - static_cast<double>(j) / n));
      d_stat = std::max(d_stat, std::fabs(static_cast<double>(j + 1) / n - f));
    }
    if (d_stat >= critical) {
      return Outcome::fail("KS " + std::to_string(d_stat) + " >= " +
                           std::to_string(critical) + " at setting " + std::to_string(i));
    }
  }
  return Outcome::pass("25 mass integrals, round trips, 10 KS checks");
}

// ---------------------------------------------------------------------------
// criterion 5: M-step optimality vs a dense 2-D grid search
// ---------------------------------------------------------------------------

Outcome criterion_mstep_optimality() {
  for (std::size_t instance = 0; instance < 50; ++instance) {
    Rng rng(derive_seed(5000, instance));
    const std::size_t n = 8 + instance % 43;
    std::vector<double> y(n), w(n);
    for (std::size_t j = 0; j < n; ++j) {
      y[j] = std::exp(1.3 * rng.normal());
      w[j] = 0.05 + 0.95 * rng.u01();
    }
    const Responsibilities z{n, 1, w};
    MStepResult ms;
    try {
      ms = m_step(y, z);
    } catch (const std::exception& e) {
      return Outcome::fail("instance " + std::to_string(instance) + ": " + e.what());
    }
    const auto oracle = testsupport::grid_search_weibull(y, w);
    const double ours =
        testsupport::weighted_weibull_loglik(y, w, ms.params[0].scale, ms.params[0].shape);
    if (std::fabs(ours - oracle.loglik) > 1e-6 || ours < oracle.loglik - 1e-9) {
      return Outcome::fail("objective gap " + std::to_string(ours - oracle.loglik) +
                           " at instance " + std::to_string(instance));
    }
  }
  return Outcome::pass("50 instances within 1e-6 of the grid maximizer");
}

// ---------------------------------------------------------------------------
// criterion 6: test statistics match brute force exhaustively, plus frozen values
// ---------------------------------------------------------------------------

Outcome criterion_test_statistics() {
  for (int T = 1; T <= 14; ++T) {
    for (int bits = 0; bits < (1 << T); ++bits) {
      std::vector<int> ind(T);
      for (int t = 0; t < T; ++t) ind[t] = (bits >> t) & 1;
      const int N = std::accumulate(ind.begin(), ind.end(), 0);
      for (const double alpha : {0.01, 0.05}) {
        const double lr = kupiec_test(N, T, alpha).statistic;
        const double oracle = testsupport::kupiec_oracle(ind, alpha);
        if (std::fabs(lr - oracle) > 1e-9) {
          return Outcome::fail("kupiec mismatch at T=" + std::to_string(T) +
                               " bits=" + std::to_string(bits));
        }
      }
      if (T >= 2) {
        const TestResult r = christoffersen_test(ind);
        const testsupport::ChrisOracle oracle = testsupport::christoffersen_oracle(ind);
        if (r.applicable != oracle.applicable) {
          return Outcome::fail("christoffersen applicability mismatch at T=" +
                               std::to_string(T) + " bits=" + std::to_string(bits));
        }
        if (r.applicable && std::fabs(r.statistic - oracle.lr) > 1e-9) {
          return Outcome::fail("christoffersen mismatch at T=" + std::to_string(T) +
                               " bits=" + std::to_string(bits));
        }
      }
    }
  }
  if (std::fabs(kupiec_test(5, 250, 0.01).statistic - 1.9568) > 1e-3) {
    return Outcome::fail("frozen LR_POF(250, 5, 1%) value drifted");
  }
  if (std::fabs(chi2_sf_1df(3.841459) - 0.05) > 1e-4) {
    return Outcome::fail("chi-square 5% critical value drifted");
  }
  return Outcome::pass("exhaustive T<=14 equivalence and frozen checkpoints");
}

// ---------------------------------------------------------------------------
// criterion 7: VaR method agreement and monotonicity in alpha
// ---------------------------------------------------------------------------

Outcome criterion_var_methods() {
  std::vector<std::string> failures(50);
  run_jobs(50, [&](std::size_t trial) {
    Rng rng(derive_seed(7000, trial));
    const double alpha = trial % 2 ? 0.05 : 0.01;
    const int g = 1 + static_cast<int>(trial % 2);
    EMConfig cfg;
    cfg.g = g;
    cfg.n_starts = 2;
    cfg.seed = derive_seed(7001, trial);
    try {
      double cdf_v = 0.0, sim_v = 0.0, se = 0.0;
      const std::uint64_t data_seed = derive_seed(7002, trial);
      const std::uint64_t sim_seed = derive_seed(7003, trial);
      switch (trial % 3) {
        case 0: {
          Rng gen(derive_seed(7004, trial));
          const MMWMixture truth = random_generator_model(g, gen);
          const FitResult fit = fit_em(sample_mmw(truth, 600, data_seed), cfg);
          cdf_v = model_var_cdf(fit.model, alpha).value;
          const VaREstimate sim = model_var_sim(fit.model, alpha, 1'000'000, sim_seed);
          sim_v = sim.value;
          se = sim.standard_error;
          break;
        }
        case 1: {
          const GaussianMixture truth{{0.5, 0.5}, {-2.0 - 2.0 * rng.u01(), 2.0},
                                      {1.0 + rng.u01(), 2.0 + rng.u01()}};
          Rng gen(data_seed);
          std::vector<double> xs(600);
          for (double& x : xs) x = truth.sample_one(gen);
          const GmmFitResult fit = fit_gmm(xs, cfg);
          cdf_v = model_var_cdf(fit.model, alpha).value;
          const VaREstimate sim = model_var_sim(fit.model, alpha, 1'000'000, sim_seed);
          sim_v = sim.value;
          se = sim.standard_error;
          break;
        }
        default: {
          const TMixture truth{{0.6, 0.4}, {-1.0, 1.5}, {1.0 + rng.u01(), 2.0},
                               {4.0 + 4.0 * rng.u01(), 8.0}};
          Rng gen(data_seed);
          std::vector<double> xs(600);
          for (double& x : xs) x = truth.sample_one(gen);
          const TmmFitResult fit = fit_tmm(xs, cfg);
          cdf_v = model_var_cdf(fit.model, alpha).value;
          const VaREstimate sim = model_var_sim(fit.model, alpha, 1'000'000, sim_seed);
          sim_v = sim.value;
          se = sim.standard_error;
          break;
        }
      }
      if (std::fabs(cdf_v - sim_v) > 3.0 * se) {
        failures[trial] = "gap " + std::to_string(std::fabs(cdf_v - sim_v)) + " vs 3se " +
                          std::to_string(3.0 * se);
      }
    } catch (const std::exception& e) {
      failures[trial] = e.what();
    }
  });
  for (std::size_t t = 0; t < failures.size(); ++t) {
    if (!failures[t].empty()) {
      return Outcome::fail("trial " + std::to_string(t) + ": " + failures[t]);
    }
  }

  // monotonicity across the full default alpha grid
  const std::vector<double> xs = sample_mmw(kTwoComponentTruth, 2000, 7771);
  EMConfig cfg;
  cfg.g = 2;
  cfg.n_starts = 2;
  cfg.seed = 7772;
  const FitResult fit = fit_em(xs, cfg);
  double prev_cdf = -1e300, prev_sim = -1e300, prev_hist = -1e300;
  for (int k = 1; k <= 100; ++k) {
    const double alpha = 0.001 * k;
    const double q_cdf = model_var_cdf(fit.model, alpha).value;
    const double q_sim = model_var_sim(fit.model, alpha, 100'000, 7773).value;
    const double q_hist = historical_var(xs, alpha).value;
    if (q_cdf < prev_cdf || q_sim < prev_sim || q_hist < prev_hist) {
      return Outcome::fail("monotonicity broken at alpha " + std::to_string(alpha));
    }
    prev_cdf = q_cdf;
    prev_sim = q_sim;
    prev_hist = q_hist;
  }
  return Outcome::pass("50 method-agreement trials and 100-point monotone grid");
}

// ---------------------------------------------------------------------------
// criterion 8: rolling backtest calibration on i.i.d. synthetic data
// ---------------------------------------------------------------------------

Outcome criterion_calibration() {
  int passes = 0;
  for (std::size_t s = 0; s < 20; ++s) {
    ReturnSeries series;
    series.values = sample_mmw(kTwoComponentTruth, 1500, derive_seed(8000, s));
    for (std::size_t i = 0; i < series.values.size(); ++i) {
      series.dates.push_back(
          {2019 + static_cast<int>(i / 336), 1 + static_cast<int>((i / 28) % 12),
           1 + static_cast<int>(i % 28)});
    }
    RollingConfig cfg;
    cfg.family = Family::MMW;
    cfg.alpha = 0.05;
    cfg.window = 250;
    cfg.em.g = 2;
    cfg.em.n_starts = 1;
    cfg.em.seed = derive_seed(8001, s);
    cfg.g_range.clear();
    cfg.n_threads = 2;
    try {
      const BacktestReport report = score_forecasts(rolling_forecast(series, cfg), series);
      if (report.kupiec.passed_at_5pct()) ++passes;
    } catch (const std::exception&) {
    }
  }
  const std::string detail = std::to_string(passes) + "/20 seeds pass Kupiec at 5%";
  return passes >= 18 ? Outcome::pass(detail) : Outcome::fail(detail);
}

// ---------------------------------------------------------------------------
// criterion 9: conditional reproduction against the published table values
// ---------------------------------------------------------------------------

struct PaperTicker {
  const char* file;
  SummaryStats expected;
  std::vector<std::pair<double, double>> var_targets;  // (alpha, published VaR)
};

Outcome criterion_paper_data() {
  const char* env = std::getenv("MIXVAR_PAPER_DATA");
  const fs::path dir = env ? fs::path(env) : fs::path("data");
  const std::vector<PaperTicker> tickers = {
      {"BRK.csv", {-15.39, 23.42, 0.89, 5.44, -0.01, 4.22, 0}, {{0.05, -13.43}, {0.01, -8.66}}},
      {"WMT.csv", {-23.24, 23.58, 0.93, 6.01, -0.16, 4.45, 0}, {{0.01, -16.26}}},
      {"CVS.csv", {-10.34, 18.44, 0.00, 1.85, 1.32, 17.36, 0}, {}},
  };
  bool any_found = false;
  std::ostringstream report;
  for (const PaperTicker& ticker : tickers) {
    const fs::path path = dir / ticker.file;
    if (!fs::exists(path)) continue;
    any_found = true;
    std::ifstream in(path);
    const PriceSeries prices = load_prices(in, {"Date", "Close"});
    const ReturnSeries returns = log_returns(prices);
    const SummaryStats stats = summary_stats(returns);

    auto entry = [&](const char* name, double got, double want) {
      const double dev = std::fabs(got - want);
      report << "  " << ticker.file << " " << name << ": " << std::fixed
             << std::setprecision(2) << got << " vs " << want
             << (dev <= 0.02 ? " (ok)" : " (deviation reported, non-binding)") << "\n";
    };
    entry("min", stats.min, ticker.expected.min);
    entry("max", stats.max, ticker.expected.max);
    entry("mean", stats.mean, ticker.expected.mean);
    entry("sd", stats.std_dev, ticker.expected.std_dev);
    entry("skew", stats.skewness, ticker.expected.skewness);
    entry("kurt", stats.kurtosis, ticker.expected.kurtosis);

    if (!ticker.var_targets.empty()) {
      EMConfig em;
      em.seed = 9000;
      const FitResult fit = select_g(returns, std::vector<int>{1, 2, 3, 4}, em);
      for (const auto& [alpha, published] : ticker.var_targets) {
        const double got = model_var_cdf(fit.model, alpha).value;
        const double dev = std::fabs(got - published);
        report << "  " << ticker.file << " VaR(" << alpha << "): " << std::fixed
               << std::setprecision(2) << got << " vs " << published
               << (dev <= 0.5 ? " (ok)" : " (deviation reported, non-binding)") << "\n";
      }
    }
  }
  if (!any_found) {
    return Outcome::skip("no user-supplied ticker data (set MIXVAR_PAPER_DATA or ./data)");
  }
  std::cout << report.str();
  return Outcome::pass("table comparisons reported above (non-binding)");
}

// ---------------------------------------------------------------------------
// criterion 10: byte-identical reruns through the command line interface
// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_determinism() {
  const fs::path dir = fs::temp_directory_path() / "mixvar_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path csv = dir / "prices.csv";
  {
    std::ofstream out(csv);
    out << "Date,Close\n";
    Rng rng(10101);
    double price = 100.0;
    for (int i = 0; i < 140; ++i) {
      out << 2018 + i / 336 << "-" << std::setw(2) << std::setfill('0')
          << 1 + (i / 28) % 12 << "-" << std::setw(2) << std::setfill('0') << 1 + i % 28
          << "," << std::setprecision(12) << price << "\n";
      price *= std::exp(0.02 * rng.normal());
    }
  }

  const fs::path out = dir / "out";
  const std::vector<std::vector<std::string>> commands = {
      {"stats", "--input", csv.string(), "--out", out.string(), "--seed", "99"},
      {"fit", "--input", csv.string(), "--out", out.string(), "--seed", "99", "--g", "2",
       "--n-starts", "2", "--family", "all"},
      {"var", "--input", csv.string(), "--out", out.string(), "--seed", "99", "--g", "1",
       "--family", "mmw", "--n-sim", "20000", "--grid-max", "0.02", "--grid-step", "0.01",
       "--n-starts", "1"},
      {"backtest", "--input", csv.string(), "--out", out.string(), "--seed", "99", "--g",
       "1", "--family", "mmw", "--alpha", "0.05", "--window", "60", "--n-starts", "1",
       "--threads", "2"},
  };

  // silence the CLI chatter
  std::ostringstream sink;
  std::streambuf* saved = std::cout.rdbuf(sink.rdbuf());
  for (const auto& cmd : commands) {
    if (mixvar::cli::run(cmd) != 0) {
      std::cout.rdbuf(saved);
      return Outcome::fail(cmd[0] + " command failed");
    }
  }
  std::vector<std::pair<fs::path, std::string>> first_pass;
  for (const auto& file : fs::recursive_directory_iterator(out)) {
    if (file.path().extension() == ".json") {
      first_pass.emplace_back(file.path(), slurp(file.path()));
    }
  }
  for (const auto& cmd : commands) {
    if (mixvar::cli::run(cmd) != 0) {
      std::cout.rdbuf(saved);
      return Outcome::fail(cmd[0] + " rerun failed");
    }
  }
  std::cout.rdbuf(saved);
  if (first_pass.empty()) return Outcome::fail("no JSON outputs were produced");
  for (const auto& [path, bytes] : first_pass) {
    if (slurp(path) != bytes) {
      return Outcome::fail("rerun changed " + path.filename().string());
    }
  }
  return Outcome::pass(std::to_string(first_pass.size()) +
                       " JSON reports byte-identical across reruns");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "EM ascent on 100 synthetic datasets (all families)", criterion_ascent},
      {2, "two-component parameter recovery", criterion_recovery},
      {3, "BIC component-count selection", criterion_bic_selection},
      {4, "distribution correctness (mass, round trip, KS)", criterion_distribution},
      {5, "M-step optimality vs grid search", criterion_mstep_optimality},
      {6, "coverage/independence statistics vs brute force", criterion_test_statistics},
      {7, "VaR method agreement and monotonicity", criterion_var_methods},
      {8, "rolling backtest calibration", criterion_calibration},
      {9, "conditional published-table comparison", criterion_paper_data},
      {10, "byte-identical reruns", criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = Outcome::fail(std::string("unhandled error: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = outcome.status == Outcome::Status::Pass ? "[PASS]"
                      : outcome.status == Outcome::Status::Skip ? "[SKIP]"
                                                                : "[FAIL]";
    std::cout << tag << " criterion " << criterion.id << ": " << criterion.name;
    if (!outcome.detail.empty()) std::cout << " -- " << outcome.detail;
    std::cout << " (" << std::fixed << std::setprecision(1) << secs << " s)\n";
    std::cout.unsetf(std::ios::fixed);
    if (outcome.status == Outcome::Status::Fail) ++failures;
  }
  return failures;
}
