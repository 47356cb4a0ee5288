#include "mixvar/returns.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <numeric>
#include <sstream>

#include "mixvar/errors.hpp"

namespace mixvar {

std::string to_string(Frequency f) {
  switch (f) {
    case Frequency::Daily: return "daily";
    case Frequency::Monthly: return "monthly";
    case Frequency::Other: return "other";
  }
  return "other";
}

Date Date::parse(const std::string& text, const std::string& format) {
  std::tm tm = {};
  std::istringstream ss(text);
  ss >> std::get_time(&tm, format.c_str());
  if (ss.fail()) {
    throw DataError("unparseable date '" + text + "' (format " + format + ")");
  }
  ss >> std::ws;
  if (ss.peek() != std::char_traits<char>::eof()) {
    throw DataError("trailing characters in date '" + text + "'");
  }
  Date d{tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday};
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) {
    throw DataError("out-of-range date '" + text + "'");
  }
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::int64_t Date::serial() const {
  // days_from_civil (proleptic Gregorian)
  int y = year;
  y -= month <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      (153u * static_cast<unsigned>(month + (month > 2 ? -3 : 9)) + 2u) / 5u +
      static_cast<unsigned>(day) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line no, fields)
};

CsvTable read_table(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      // strip a UTF-8 BOM if present
      if (line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' && line[2] == '\xBF') {
        line.erase(0, 3);
      }
      table.header = split_csv_line(line);
      for (auto& h : table.header) h = trim(h);
      continue;
    }
    if (trim(line).empty()) continue;
    table.rows.emplace_back(line_no, split_csv_line(line));
  }
  if (table.header.empty()) {
    throw SchemaError("empty CSV: no header row");
  }
  return table;
}

std::size_t column_index(const CsvTable& table, const std::string& name) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == name) return i;
  }
  throw SchemaError("column '" + name + "' not found in CSV header");
}

double parse_number(const std::string& raw, std::size_t line_no, const std::string& what) {
  const std::string cell = trim(raw);
  if (cell.empty()) {
    throw DataError("missing " + what + " at row " + std::to_string(line_no));
  }
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw DataError("unparseable " + what + " '" + cell + "' at row " + std::to_string(line_no));
  }
  if (pos != cell.size()) {
    throw DataError("unparseable " + what + " '" + cell + "' at row " + std::to_string(line_no));
  }
  return v;
}

template <class Row>
void sort_and_check_dates(std::vector<Row>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].date == rows[i - 1].date) {
      throw DataError("duplicate date " + rows[i].date.to_string() + " (rows " +
                      std::to_string(rows[i - 1].line_no) + " and " +
                      std::to_string(rows[i].line_no) + ")");
    }
  }
}

}  // namespace

PriceSeries load_prices(std::istream& in, const CsvSpec& spec) {
  const CsvTable table = read_table(in);
  const std::size_t date_ix = column_index(table, spec.date_column);
  const std::size_t price_ix = column_index(table, spec.value_column);

  struct Row {
    Date date;
    double price;
    std::size_t line_no;
  };
  std::vector<Row> rows;
  rows.reserve(table.rows.size());
  for (const auto& [line_no, fields] : table.rows) {
    if (fields.size() <= std::max(date_ix, price_ix)) {
      throw SchemaError("row " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected at least " +
                        std::to_string(std::max(date_ix, price_ix) + 1));
    }
    Date date;
    try {
      date = Date::parse(trim(fields[date_ix]), spec.date_format);
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " at row " + std::to_string(line_no));
    }
    const double price = parse_number(fields[price_ix], line_no, "price");
    if (!(price > 0.0) || !std::isfinite(price)) {
      throw DataError("non-positive price " + trim(fields[price_ix]) + " at row " +
                      std::to_string(line_no));
    }
    rows.push_back({date, price, line_no});
  }
  sort_and_check_dates(rows);

  PriceSeries out;
  out.dates.reserve(rows.size());
  out.prices.reserve(rows.size());
  for (const auto& r : rows) {
    out.dates.push_back(r.date);
    out.prices.push_back(r.price);
  }
  return out;
}

ReturnSeries load_returns(std::istream& in, const CsvSpec& spec) {
  const CsvTable table = read_table(in);
  const std::size_t date_ix = column_index(table, spec.date_column);
  const std::size_t value_ix = column_index(table, spec.value_column);

  struct Row {
    Date date;
    double value;
    std::size_t line_no;
  };
  std::vector<Row> rows;
  rows.reserve(table.rows.size());
  for (const auto& [line_no, fields] : table.rows) {
    if (fields.size() <= std::max(date_ix, value_ix)) {
      throw SchemaError("row " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected at least " +
                        std::to_string(std::max(date_ix, value_ix) + 1));
    }
    Date date;
    try {
      date = Date::parse(trim(fields[date_ix]), spec.date_format);
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " at row " + std::to_string(line_no));
    }
    const double value = parse_number(fields[value_ix], line_no, "return");
    if (!std::isfinite(value)) {
      throw DataError("non-finite return at row " + std::to_string(line_no));
    }
    rows.push_back({date, value, line_no});
  }
  sort_and_check_dates(rows);

  ReturnSeries out;
  out.dates.reserve(rows.size());
  out.values.reserve(rows.size());
  for (const auto& r : rows) {
    out.dates.push_back(r.date);
    out.values.push_back(r.value);
  }
  out.frequency = infer_frequency(out.dates);
  return out;
}

ReturnSeries log_returns(const PriceSeries& prices) {
  if (prices.size() < 2) {
    throw std::invalid_argument("log_returns needs at least 2 prices, got " +
                                std::to_string(prices.size()));
  }
  ReturnSeries out;
  out.dates.reserve(prices.size() - 1);
  out.values.reserve(prices.size() - 1);
  for (std::size_t t = 0; t + 1 < prices.size(); ++t) {
    out.values.push_back(100.0 * std::log(prices.prices[t + 1] / prices.prices[t]));
    out.dates.push_back(prices.dates[t + 1]);
  }
  out.frequency = infer_frequency(out.dates);
  return out;
}

SummaryStats summary_stats(const ReturnSeries& returns) {
  return summary_stats(std::span<const double>(returns.values));
}

SummaryStats summary_stats(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 4) {
    throw std::invalid_argument("summary_stats needs at least 4 observations, got " +
                                std::to_string(n));
  }
  SummaryStats s;
  s.n = n;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (const double v : values) {
    const double d = v - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  s.std_dev = std::sqrt(m2 / static_cast<double>(n - 1));
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  if (!(m2 > 0.0)) {
    throw DataError("degenerate series: zero variance, skewness/kurtosis undefined");
  }
  s.skewness = m3 / std::pow(m2, 1.5);
  s.kurtosis = m4 / (m2 * m2);
  return s;
}

Frequency infer_frequency(const std::vector<Date>& dates) {
  if (dates.size() < 2) return Frequency::Other;
  std::vector<std::int64_t> gaps;
  gaps.reserve(dates.size() - 1);
  for (std::size_t i = 1; i < dates.size(); ++i) {
    gaps.push_back(dates[i].serial() - dates[i - 1].serial());
  }
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const std::int64_t median = gaps[gaps.size() / 2];
  if (median <= 4) return Frequency::Daily;
  if (median >= 25 && median <= 35) return Frequency::Monthly;
  return Frequency::Other;
}

}  // namespace mixvar
