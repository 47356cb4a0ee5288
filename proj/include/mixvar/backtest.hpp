#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mixvar/family.hpp"
#include "mixvar/mixture.hpp"
#include "mixvar/returns.hpp"
#include "mixvar/special.hpp"
#include "mixvar/var.hpp"

namespace mixvar {

/// 0/1 indicators, 1 when the realized return fell strictly below the
/// forecast VaR for that day.
struct ExceedanceSeries {
  std::vector<Date> dates;
  std::vector<int> indicators;

  int count() const;
};

/// Likelihood-ratio test outcome; the statistic is chi-square(1) under the
/// null. `applicable` is false when the data cannot identify the test (for
/// the independence test: no transitions out of the exceedance state).
struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool applicable = true;

  bool passed_at_5pct() const { return !applicable || p_value >= 0.05; }
};

/// One day of a rolling one-step-ahead forecast.
struct ForecastPoint {
  Date date;
  double realized = 0.0;
  double model_var = 0.0;     // NaN when the window's fit failed
  double hist_var = 0.0;      // historical VaR of the same training window
  bool ok = false;
  std::string reason;         // failure reason when !ok
  int chosen_g = 0;
  bool converged = false;
  bool saturated = false;     // realized return above the window's mirror constant
};

struct RollingForecast {
  Family family = Family::MMW;
  double alpha = 0.01;
  int window = 250;
  std::vector<ForecastPoint> points;
};

struct RollingConfig {
  Family family = Family::MMW;
  double alpha = 0.01;
  int window = 250;
  EMConfig em;
  std::vector<int> g_range = {1, 2, 3, 4};  // empty: use em.g fixed
  VaRMethod method = VaRMethod::CdfBisection;
  std::size_t n_sim = 100'000;
  int n_threads = 0;  // 0 = hardware concurrency
};

struct BacktestReport {
  Family family = Family::MMW;
  double alpha = 0.01;
  int window = 250;
  RollingForecast forecasts;
  ExceedanceSeries exceedances;
  TestResult kupiec;
  TestResult christoffersen;
  double mse = 0.0;           // vs the historical VaR of each training window
  double failure_rate = 0.0;  // share of 250-forecast segments failing Kupiec at 5%
  int n_exceed = 0;
  int n_obs = 0;
};

/// Strict comparison: indicator 1 iff realized < forecast (a tie counts as
/// no exceedance). The date-aware overload requires exactly matching dates.
ExceedanceSeries exceedances(std::span<const double> realized,
                             std::span<const double> var_forecasts);
ExceedanceSeries exceedances(const ReturnSeries& realized,
                             const std::vector<Date>& forecast_dates,
                             std::span<const double> var_forecasts);

/// Proportion-of-failures test:
/// LR = -2 [ (T-N) ln(1-a) + N ln a - (T-N) ln(1-N/T) - N ln(N/T) ],
/// with the 0 ln 0 = 0 convention.
TestResult kupiec_test(int n_exceed, int n_obs, double alpha);

/// Independence test on first-order transition counts; not applicable when
/// a conditional exceedance rate cannot be estimated.
TestResult christoffersen_test(std::span<const int> indicators);

/// Refits the configured family on each 250-observation window and records
/// the one-day-ahead VaR. Window fits are independent and may run in
/// parallel; results are deterministic for a given seed because every
/// window derives its own seed from (root seed, family, window index).
RollingForecast rolling_forecast(const ReturnSeries& returns, const RollingConfig& cfg);

/// Scores a forecast series against realized returns: exceedance tests on
/// the full series, MSE against the per-window historical VaR, and the
/// Kupiec failure rate over non-overlapping 250-forecast segments (the
/// whole series forms one segment when shorter).
BacktestReport score_forecasts(const RollingForecast& forecasts,
                               const ReturnSeries& realized);

}  // namespace mixvar
