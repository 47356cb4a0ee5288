#include "mixvar/mirrored_weibull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mixvar/errors.hpp"
#include "mixvar/rootfind.hpp"
#include "mixvar/special.hpp"

namespace mixvar {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double mirror_constant(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("mirror_constant: empty sample");
  }
  const double max = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(max)) {
    throw DataError("mirror_constant: non-finite observation");
  }
  double c = std::ceil(std::fabs(max));
  if (c - max < 1e-9) {
    c += 1.0;  // maximum landed on the ceiling; keep c - x strictly positive
  }
  return c;
}

double mirror_constant(const ReturnSeries& returns) {
  return mirror_constant(std::span<const double>(returns.values));
}

double mirror_transform(double x, double c) {
  if (x > c) {
    throw std::domain_error("mirror_transform: x = " + std::to_string(x) +
                            " exceeds mirror constant c = " + std::to_string(c));
  }
  return c - x;
}

double weibull_pdf(double y, const WeibullParams& p) {
  if (y < 0.0) return 0.0;
  const double t = y / p.scale;
  // pow(0,0) == 1 makes the shape == 1 boundary exact; shape < 1 diverges at 0.
  return (p.shape / p.scale) * std::pow(t, p.shape - 1.0) * std::exp(-std::pow(t, p.shape));
}

double weibull_log_pdf(double y, const WeibullParams& p) {
  if (y < 0.0) return -kInf;
  if (y == 0.0) {
    if (p.shape == 1.0) return std::log(p.shape / p.scale);
    return p.shape < 1.0 ? kInf : -kInf;
  }
  const double log_t = std::log(y / p.scale);
  return std::log(p.shape / p.scale) + (p.shape - 1.0) * log_t -
         std::exp(p.shape * log_t);
}

double weibull_cdf(double y, const WeibullParams& p) {
  if (y <= 0.0) return 0.0;
  return -std::expm1(-std::pow(y / p.scale, p.shape));
}

double mw_pdf(double x, const MirroredWeibullParams& p) {
  if (x > p.c) return 0.0;
  return weibull_pdf(p.c - x, {p.scale, p.shape});
}

double mw_log_pdf(double x, const MirroredWeibullParams& p) {
  if (x > p.c) return -kInf;
  return weibull_log_pdf(p.c - x, {p.scale, p.shape});
}

double mw_cdf(double x, const MirroredWeibullParams& p) {
  if (x >= p.c) return 1.0;
  return std::exp(-std::pow((p.c - x) / p.scale, p.shape));
}

double mw_quantile(double p_level, const MirroredWeibullParams& p) {
  if (!(p_level > 0.0 && p_level < 1.0)) {
    throw std::domain_error("mw_quantile: probability must lie in (0,1)");
  }
  return p.c - p.scale * std::pow(-std::log(p_level), 1.0 / p.shape);
}

std::vector<double> mw_sample(const MirroredWeibullParams& p, std::size_t n,
                              std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("mw_sample: n must be at least 1");
  }
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) x = mw_sample_one(p, rng);
  return out;
}

double mw_sample_one(const MirroredWeibullParams& p, Rng& rng) {
  return mw_quantile(rng.u01(), p);
}

MomEstimate mom_estimate(std::span<const double> y, std::span<const double> weights) {
  if (y.size() != weights.size()) {
    throw std::invalid_argument("mom_estimate: sample/weight size mismatch");
  }
  double total_weight = 0.0;
  double weighted_sum = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    total_weight += weights[j];
    weighted_sum += weights[j] * y[j];
  }
  if (!(total_weight > 1.0)) {
    throw std::invalid_argument("mom_estimate: weighted sample size must exceed 1");
  }
  const double mean = weighted_sum / total_weight;
  if (!(mean > 0.0)) {
    throw DataError("mom_estimate: sample mean must be positive");
  }
  double ss = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double d = y[j] - mean;
    ss += weights[j] * d * d;
  }
  const double variance = ss / (total_weight - 1.0);
  if (!(variance > 0.0)) {
    throw DataError("mom_estimate: degenerate sample (zero weighted variance)");
  }

  const double cv2 = variance / (mean * mean);
  auto f = [&](double shape) { return weibull_cv_squared(shape) - cv2; };
  const RootResult root = bisect_log(f, kShapeMin, kShapeMax);
  const double shape = root.x;
  const double scale = mean * std::exp(-log_gamma(1.0 + 1.0 / shape));
  return {{scale, shape}, !root.bracketed};
}

MomEstimate mom_estimate(std::span<const double> y) {
  const std::vector<double> w(y.size(), 1.0);
  return mom_estimate(y, w);
}

}  // namespace mixvar
