#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixvar/family.hpp"
#include "mixvar/mixture.hpp"
#include "mixvar/returns.hpp"
#include "mixvar/rng.hpp"
#include "mixvar/rootfind.hpp"

namespace mixvar {

enum class VaRMethod { CdfBisection, Simulation, Historical };

std::string to_string(VaRMethod m);
VaRMethod var_method_from_string(const std::string& s);

/// Request-level parameters; the CLI enforces the left-tail convention
/// alpha < 0.5 here, while the estimation routines accept any alpha in (0,1)
/// so symmetric sanity checks (alpha = 0.5) remain possible.
struct VaRRequest {
  double alpha = 0.01;
  VaRMethod method = VaRMethod::CdfBisection;
  std::size_t n_sim = 1'000'000;
  std::uint64_t seed = 12345;
};

void validate(const VaRRequest& req);

/// Return-space lower quantile (typically negative). `loss` is its
/// negation, the loss-space figure; reports carry both.
struct VaREstimate {
  double value = 0.0;
  double loss = 0.0;
  double alpha = 0.0;
  VaRMethod method = VaRMethod::Historical;
  std::optional<Family> family;  // empty for the historical method
  double standard_error = std::numeric_limits<double>::quiet_NaN();  // simulation only
};

namespace detail {

/// Interpolated order-statistic quantile (index h = alpha*(n-1)+1, 1-based).
/// Partially sorts xs in place.
inline double interpolated_quantile(std::vector<double>& xs, double alpha) {
  const std::size_t n = xs.size();
  const double h = alpha * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  std::nth_element(xs.begin(), xs.begin() + lo, xs.end());
  const double x_lo = xs[lo];
  if (frac == 0.0 || lo + 1 >= n) return x_lo;
  std::nth_element(xs.begin() + lo + 1, xs.begin() + lo + 1, xs.end());
  return x_lo + frac * (xs[lo + 1] - x_lo);
}

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("alpha must lie in (0,1), got " + std::to_string(alpha));
  }
}

}  // namespace detail

template <class M>
concept MixtureModel = requires(const M& m, double x, Rng& rng) {
  { m.pdf(x) } -> std::convertible_to<double>;
  { m.cdf(x) } -> std::convertible_to<double>;
  { m.sample_one(rng) } -> std::convertible_to<double>;
  { m.g() } -> std::convertible_to<int>;
  { M::kFamily } -> std::convertible_to<Family>;
};

/// Empirical alpha-quantile of the observed returns.
VaREstimate historical_var(std::span<const double> values, double alpha);
VaREstimate historical_var(const ReturnSeries& returns, double alpha);

/// Deterministic quantile via bisection on the closed-form mixture CDF;
/// the bracket is widened geometrically until it straddles alpha, then
/// refined to 1e-10 in x. A single-component MMW short-circuits to the
/// closed-form quantile.
template <MixtureModel M>
VaREstimate model_var_cdf(const M& model, double alpha) {
  detail::check_alpha(alpha);
  VaREstimate est;
  est.alpha = alpha;
  est.method = VaRMethod::CdfBisection;
  est.family = M::kFamily;

  if constexpr (std::is_same_v<M, MMWMixture>) {
    if (model.g() == 1) {
      est.value = mw_quantile(
          alpha, {model.components[0].scale, model.components[0].shape, model.c});
      est.loss = -est.value;
      return est;
    }
  }

  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 200 && model.cdf(lo) > alpha; ++i) lo -= (hi - lo);
  for (int i = 0; i < 200 && model.cdf(hi) < alpha; ++i) hi += (hi - lo);
  auto f = [&](double x) { return model.cdf(x) - alpha; };
  est.value = bisect(f, lo, hi, 1e-10, 400).x;
  est.loss = -est.value;
  return est;
}

/// Monte Carlo quantile: categorical component draw, then the component
/// sampler; the standard error uses the binomial/density approximation
/// sqrt(alpha (1-alpha) / n) / f(q).
template <MixtureModel M>
VaREstimate model_var_sim(const M& model, double alpha, std::size_t n_sim,
                          std::uint64_t seed) {
  detail::check_alpha(alpha);
  if (n_sim < 10'000) {
    throw std::invalid_argument("model_var_sim: n_sim must be at least 10^4");
  }
  Rng rng(seed);
  std::vector<double> draws(n_sim);
  for (double& d : draws) d = model.sample_one(rng);

  VaREstimate est;
  est.alpha = alpha;
  est.method = VaRMethod::Simulation;
  est.family = M::kFamily;
  est.value = detail::interpolated_quantile(draws, alpha);
  est.loss = -est.value;
  const double dens = model.pdf(est.value);
  est.standard_error = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n_sim)) /
                       std::max(dens, 1e-300);
  return est;
}

template <MixtureModel M>
VaREstimate estimate_var(const M& model, const VaRRequest& req) {
  validate(req);
  switch (req.method) {
    case VaRMethod::CdfBisection: return model_var_cdf(model, req.alpha);
    case VaRMethod::Simulation: return model_var_sim(model, req.alpha, req.n_sim, req.seed);
    case VaRMethod::Historical:
      throw std::invalid_argument("historical method needs a return series, not a model");
  }
  throw std::logic_error("unreachable");
}

}  // namespace mixvar
