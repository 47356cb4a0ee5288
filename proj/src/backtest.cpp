#include "mixvar/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "mixvar/baselines.hpp"
#include "mixvar/errors.hpp"

namespace mixvar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// x ln p with the 0 ln 0 = 0 convention.
double xlogy(double x, double p) { return x > 0.0 ? x * std::log(p) : 0.0; }

}  // namespace

int ExceedanceSeries::count() const {
  return std::accumulate(indicators.begin(), indicators.end(), 0);
}

ExceedanceSeries exceedances(std::span<const double> realized,
                             std::span<const double> var_forecasts) {
  if (realized.size() != var_forecasts.size()) {
    throw DataError("exceedances: series lengths differ (" +
                    std::to_string(realized.size()) + " vs " +
                    std::to_string(var_forecasts.size()) + ")");
  }
  ExceedanceSeries out;
  out.indicators.reserve(realized.size());
  for (std::size_t t = 0; t < realized.size(); ++t) {
    out.indicators.push_back(realized[t] < var_forecasts[t] ? 1 : 0);
  }
  return out;
}

ExceedanceSeries exceedances(const ReturnSeries& realized,
                             const std::vector<Date>& forecast_dates,
                             std::span<const double> var_forecasts) {
  if (forecast_dates.size() != var_forecasts.size()) {
    throw DataError("exceedances: forecast dates/values lengths differ");
  }
  ExceedanceSeries out;
  out.dates = forecast_dates;
  out.indicators.reserve(forecast_dates.size());
  for (std::size_t t = 0; t < forecast_dates.size(); ++t) {
    const auto it = std::lower_bound(realized.dates.begin(), realized.dates.end(),
                                     forecast_dates[t]);
    if (it == realized.dates.end() || *it != forecast_dates[t]) {
      throw DataError("exceedances: forecast date " + forecast_dates[t].to_string() +
                      " not present in the realized series");
    }
    const double r = realized.values[static_cast<std::size_t>(it - realized.dates.begin())];
    out.indicators.push_back(r < var_forecasts[t] ? 1 : 0);
  }
  return out;
}

TestResult kupiec_test(int n_exceed, int n_obs, double alpha) {
  if (n_obs < 1) throw std::invalid_argument("kupiec_test: n_obs must be >= 1");
  if (n_exceed < 0 || n_exceed > n_obs) {
    throw std::invalid_argument("kupiec_test: n_exceed out of range");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("kupiec_test: alpha must lie in (0,1)");
  }
  const double T = n_obs;
  const double N = n_exceed;
  const double rate = N / T;
  const double lr = -2.0 * (xlogy(T - N, 1.0 - alpha) + xlogy(N, alpha) -
                            xlogy(T - N, 1.0 - rate) - xlogy(N, rate));
  TestResult res;
  res.statistic = std::max(lr, 0.0);  // clip the -0 rounding case
  res.p_value = chi2_sf_1df(res.statistic);
  return res;
}

TestResult christoffersen_test(std::span<const int> indicators) {
  if (indicators.size() < 2) {
    throw std::invalid_argument("christoffersen_test: need at least 2 indicators");
  }
  double n00 = 0, n01 = 0, n10 = 0, n11 = 0;
  for (std::size_t t = 1; t < indicators.size(); ++t) {
    const int a = indicators[t - 1] ? 1 : 0;
    const int b = indicators[t] ? 1 : 0;
    if (a == 0 && b == 0) ++n00;
    else if (a == 0 && b == 1) ++n01;
    else if (a == 1 && b == 0) ++n10;
    else ++n11;
  }

  TestResult res;
  if (n10 + n11 == 0.0 || n00 + n01 == 0.0) {
    // one of the states was never left/entered: the conditional rates are
    // unidentifiable, report not-applicable rather than failing
    res.applicable = false;
    res.statistic = kNaN;
    res.p_value = kNaN;
    return res;
  }

  const double total = n00 + n01 + n10 + n11;
  const double pooled = (n01 + n11) / total;
  const double p01 = n01 / (n00 + n01);
  const double p11 = n11 / (n10 + n11);

  const double l0 = xlogy(n00 + n10, 1.0 - pooled) + xlogy(n01 + n11, pooled);
  const double l1 = xlogy(n00, 1.0 - p01) + xlogy(n01, p01) +
                    xlogy(n10, 1.0 - p11) + xlogy(n11, p11);
  res.statistic = std::max(-2.0 * (l0 - l1), 0.0);
  res.p_value = chi2_sf_1df(res.statistic);
  return res;
}

namespace {

struct WindowFit {
  double var = kNaN;
  int g = 0;
  bool converged = false;
};

WindowFit fit_window_var(std::span<const double> window_values, const RollingConfig& cfg,
                         std::uint64_t window_seed) {
  EMConfig em = cfg.em;
  em.seed = window_seed;

  auto var_of = [&](const auto& model) {
    if (cfg.method == VaRMethod::Simulation) {
      return model_var_sim(model, cfg.alpha, cfg.n_sim,
                           derive_seed(window_seed, 0x5157ull))
          .value;
    }
    return model_var_cdf(model, cfg.alpha).value;
  };

  WindowFit out;
  switch (cfg.family) {
    case Family::MMW: {
      FitResult fr = cfg.g_range.empty() ? fit_em(window_values, em)
                                         : select_g(window_values, cfg.g_range, em);
      out.var = var_of(fr.model);
      out.g = fr.model.g();
      out.converged = fr.converged;
      break;
    }
    case Family::GMM: {
      GmmFitResult fr = cfg.g_range.empty() ? fit_gmm(window_values, em)
                                            : select_g_gmm(window_values, cfg.g_range, em);
      out.var = var_of(fr.model);
      out.g = fr.model.g();
      out.converged = fr.converged;
      break;
    }
    case Family::TMM: {
      TmmFitResult fr = cfg.g_range.empty() ? fit_tmm(window_values, em)
                                            : select_g_tmm(window_values, cfg.g_range, em);
      out.var = var_of(fr.model);
      out.g = fr.model.g();
      out.converged = fr.converged;
      break;
    }
  }
  return out;
}

}  // namespace

RollingForecast rolling_forecast(const ReturnSeries& returns, const RollingConfig& cfg) {
  const std::size_t n = returns.size();
  const std::size_t window = static_cast<std::size_t>(cfg.window);
  if (cfg.window < 2) throw std::invalid_argument("rolling_forecast: window must be >= 2");
  if (n <= window) {
    throw std::invalid_argument("rolling_forecast: need more observations (" +
                                std::to_string(n) + ") than the window (" +
                                std::to_string(window) + ")");
  }
  if (window < static_cast<std::size_t>(std::ceil(1.0 / cfg.alpha))) {
    throw std::invalid_argument(
        "rolling_forecast: window too short for the historical quantile at alpha = " +
        std::to_string(cfg.alpha));
  }

  RollingForecast fc;
  fc.family = cfg.family;
  fc.alpha = cfg.alpha;
  fc.window = cfg.window;
  fc.points.resize(n - window);

  const std::uint64_t family_tag = static_cast<std::uint64_t>(cfg.family) + 1;

  auto run_window = [&](std::size_t idx) {
    const std::size_t t = window + idx;
    const std::span<const double> slice(returns.values.data() + (t - window), window);

    ForecastPoint& pt = fc.points[idx];
    pt.date = returns.dates[t];
    pt.realized = returns.values[t];
    pt.hist_var = historical_var(slice, cfg.alpha).value;
    pt.saturated = returns.values[t] > mirror_constant(slice);

    try {
      const WindowFit wf =
          fit_window_var(slice, cfg, derive_seed(cfg.em.seed, family_tag, t));
      pt.model_var = wf.var;
      pt.chosen_g = wf.g;
      pt.converged = wf.converged;
      pt.ok = true;
    } catch (const std::exception& e) {
      pt.model_var = kNaN;
      pt.ok = false;
      pt.reason = e.what();
    }
  };

  const std::size_t n_windows = fc.points.size();
  unsigned n_threads = cfg.n_threads > 0 ? static_cast<unsigned>(cfg.n_threads)
                                         : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, n_windows));

  if (n_threads == 1) {
    for (std::size_t i = 0; i < n_windows; ++i) run_window(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n_windows) return;
          run_window(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return fc;
}

BacktestReport score_forecasts(const RollingForecast& forecasts,
                               const ReturnSeries& realized) {
  BacktestReport report;
  report.family = forecasts.family;
  report.alpha = forecasts.alpha;
  report.window = forecasts.window;
  report.forecasts = forecasts;

  std::vector<Date> ok_dates;
  std::vector<double> ok_vars;
  double sq_err = 0.0;
  for (const ForecastPoint& pt : forecasts.points) {
    if (!pt.ok) continue;
    ok_dates.push_back(pt.date);
    ok_vars.push_back(pt.model_var);
    const double d = pt.model_var - pt.hist_var;
    sq_err += d * d;
  }
  if (ok_dates.empty()) {
    throw FitError("score_forecasts: no successful forecasts to score");
  }

  report.exceedances = exceedances(realized, ok_dates, ok_vars);
  report.n_obs = static_cast<int>(report.exceedances.indicators.size());
  report.n_exceed = report.exceedances.count();
  report.mse = sq_err / static_cast<double>(ok_dates.size());
  report.kupiec = kupiec_test(report.n_exceed, report.n_obs, forecasts.alpha);
  report.christoffersen = christoffersen_test(report.exceedances.indicators);

  // Kupiec failure rate over non-overlapping 250-forecast segments; a
  // series shorter than one segment is scored as a single segment.
  const std::vector<int>& ind = report.exceedances.indicators;
  const std::size_t seg_len = 250;
  std::size_t n_segments = ind.size() / seg_len;
  int failures = 0;
  if (n_segments == 0) {
    n_segments = 1;
    const int n = std::accumulate(ind.begin(), ind.end(), 0);
    failures = kupiec_test(n, static_cast<int>(ind.size()), forecasts.alpha).p_value < 0.05
                   ? 1
                   : 0;
  } else {
    for (std::size_t s = 0; s < n_segments; ++s) {
      const auto begin = ind.begin() + static_cast<std::ptrdiff_t>(s * seg_len);
      const int n = std::accumulate(begin, begin + seg_len, 0);
      if (kupiec_test(n, static_cast<int>(seg_len), forecasts.alpha).p_value < 0.05) {
        ++failures;
      }
    }
  }
  report.failure_rate = static_cast<double>(failures) / static_cast<double>(n_segments);
  return report;
}

}  // namespace mixvar
