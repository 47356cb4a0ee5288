#pragma once

#include <span>
#include <vector>

#include "mixvar/family.hpp"
#include "mixvar/mixture.hpp"
#include "mixvar/returns.hpp"
#include "mixvar/rng.hpp"

namespace mixvar {

/// Univariate Gaussian mixture, fitted directly on the return axis.
struct GaussianMixture {
  static constexpr Family kFamily = Family::GMM;

  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;

  int g() const { return static_cast<int>(weights.size()); }
  double pdf(double x) const;
  double cdf(double x) const;
  double sample_one(Rng& rng) const;
};

/// Univariate Student-t mixture with per-component location, scale and
/// degrees of freedom. Degrees of freedom are estimated, not fixed.
struct TMixture {
  static constexpr Family kFamily = Family::TMM;

  std::vector<double> weights;
  std::vector<double> locations;
  std::vector<double> scales;  // sigma, not sigma^2
  std::vector<double> dofs;

  int g() const { return static_cast<int>(weights.size()); }
  double pdf(double x) const;
  double cdf(double x) const;
  double sample_one(Rng& rng) const;
};

using GmmFitResult = FitResultT<GaussianMixture>;
using TmmFitResult = FitResultT<TMixture>;

/// Bracket for the degrees-of-freedom solve.
inline constexpr double kDofMin = 0.5;
inline constexpr double kDofMax = 200.0;

/// Standard univariate EM; same stopping rule, multi-start and BIC
/// conventions as the MMW fitter. BIC uses m = 3g - 1.
GmmFitResult fit_gmm(std::span<const double> xs, const EMConfig& cfg);
GmmFitResult fit_gmm(const ReturnSeries& returns, const EMConfig& cfg);

/// ECM for t mixtures: gamma weights u = (dof+1)/(dof + delta) with delta
/// the squared standardized residual; dof updated per cycle by a bracketed
/// root solve of the standard digamma equation on [0.5, 200]. BIC uses
/// m = 4g - 1.
TmmFitResult fit_tmm(std::span<const double> xs, const EMConfig& cfg);
TmmFitResult fit_tmm(const ReturnSeries& returns, const EMConfig& cfg);

GmmFitResult select_g_gmm(std::span<const double> xs, std::span<const int> g_range,
                          const EMConfig& cfg);
TmmFitResult select_g_tmm(std::span<const double> xs, std::span<const int> g_range,
                          const EMConfig& cfg);

}  // namespace mixvar
