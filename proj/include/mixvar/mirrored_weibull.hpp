#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mixvar/returns.hpp"
#include "mixvar/rng.hpp"

namespace mixvar {

/// Bracket for every shape-parameter solve in the library.
inline constexpr double kShapeMin = 0.05;
inline constexpr double kShapeMax = 100.0;

/// Two-parameter Weibull on the positive half line.
struct WeibullParams {
  double scale = 1.0;
  double shape = 1.0;
};

/// Weibull reflected about the mirror constant c: if Y ~ Weibull(scale,
/// shape) then X = c - Y, supported on x <= c. c is fixed from the sample,
/// not estimated.
struct MirroredWeibullParams {
  double scale = 1.0;
  double shape = 1.0;
  double c = 0.0;
};

/// c = ceil(|max(values)|), bumped by one when the maximum lands exactly on
/// the ceiling so every transformed point stays strictly positive (the
/// complete-data log-likelihood contains log(c - x) terms).
double mirror_constant(std::span<const double> values);
double mirror_constant(const ReturnSeries& returns);

/// y = c - x; domain error when x > c.
double mirror_transform(double x, double c);

// Plain Weibull on the mirrored axis.
double weibull_pdf(double y, const WeibullParams& p);
double weibull_log_pdf(double y, const WeibullParams& p);
double weibull_cdf(double y, const WeibullParams& p);

/// Density of the mirrored Weibull; 0 for x > c by convention so mixture
/// E-steps can evaluate every component at every point.
double mw_pdf(double x, const MirroredWeibullParams& p);
double mw_log_pdf(double x, const MirroredWeibullParams& p);

/// F(x) = exp(-((c-x)/scale)^shape) for x <= c, 1 above c.
double mw_cdf(double x, const MirroredWeibullParams& p);

/// Closed form: x = c - scale * (-ln p)^(1/shape), p in (0,1).
double mw_quantile(double p_level, const MirroredWeibullParams& p);

/// Inverse-transform sampling; deterministic given the seed.
std::vector<double> mw_sample(const MirroredWeibullParams& p, std::size_t n,
                              std::uint64_t seed);
double mw_sample_one(const MirroredWeibullParams& p, Rng& rng);

/// Method-of-moments estimate from a weighted positive sample: the shape
/// solves CV^2 = weibull_cv_squared(shape) by bisection on [0.05, 100];
/// scale = mean / Gamma(1 + 1/shape). `clamped` is set when the sample CV
/// falls outside the range achievable inside the bracket.
struct MomEstimate {
  WeibullParams params;
  bool clamped = false;
};

MomEstimate mom_estimate(std::span<const double> y, std::span<const double> weights);
MomEstimate mom_estimate(std::span<const double> y);

}  // namespace mixvar
