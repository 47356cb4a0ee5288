#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mixvar {

enum class Frequency { Daily, Monthly, Other };

std::string to_string(Frequency f);

/// Calendar date with day precision.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  /// Parses with a std::get_time format string, "%Y-%m-%d" by default.
  static Date parse(const std::string& text, const std::string& format = "%Y-%m-%d");

  std::string to_string() const;  // ISO-8601

  /// Days since 1970-01-01 (proleptic Gregorian); used for gap arithmetic.
  std::int64_t serial() const;

  auto operator<=>(const Date&) const = default;
};

/// Adjusted closing prices, sorted by strictly increasing date.
struct PriceSeries {
  std::vector<Date> dates;
  std::vector<double> prices;

  std::size_t size() const { return prices.size(); }
};

/// Log returns in percent units; the universal input of the library.
struct ReturnSeries {
  std::vector<Date> dates;
  std::vector<double> values;
  Frequency frequency = Frequency::Other;

  std::size_t size() const { return values.size(); }
};

/// Table-1-style summary statistics. Kurtosis is non-excess (Gaussian = 3);
/// std_dev uses the n-1 denominator, the central moments use 1/n.
struct SummaryStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
  std::size_t n = 0;
};

/// Column mapping for CSV ingestion. The file must be UTF-8,
/// comma-delimited, with a header row.
struct CsvSpec {
  std::string date_column;
  std::string value_column;
  std::string date_format = "%Y-%m-%d";
};

/// Reads a price CSV. Rows are sorted ascending by date; duplicate dates,
/// non-positive or missing prices are data errors naming the offending row.
PriceSeries load_prices(std::istream& in, const CsvSpec& spec);

/// Reads a CSV whose value column already holds returns (skips the log
/// transform). Values must be finite.
ReturnSeries load_returns(std::istream& in, const CsvSpec& spec);

/// values[t] = 100 * ln(prices[t+1] / prices[t]); dates taken from the later
/// day of each pair. Requires at least two prices.
ReturnSeries log_returns(const PriceSeries& prices);

SummaryStats summary_stats(const ReturnSeries& returns);
SummaryStats summary_stats(std::span<const double> values);

/// Heuristic from the median day gap: <= 4 days is daily, 25..35 monthly.
Frequency infer_frequency(const std::vector<Date>& dates);

}  // namespace mixvar
