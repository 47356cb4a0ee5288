#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mixvar/family.hpp"
#include "mixvar/mirrored_weibull.hpp"
#include "mixvar/returns.hpp"
#include "mixvar/rng.hpp"

namespace mixvar {

enum class InitMethod { KMeans, QuantileSplit, Random };

std::string to_string(InitMethod m);
InitMethod init_method_from_string(const std::string& s);

/// EM settings shared by all mixture families.
struct EMConfig {
  int g = 1;
  int max_iter = 500;
  double tol = 1e-6;
  InitMethod init = InitMethod::KMeans;
  int n_starts = 5;
  std::uint64_t seed = 12345;
};

void validate(const EMConfig& cfg);

/// Mixture of mirrored Weibulls. Component parameters live on the mirrored
/// axis y = c - x with a single shared mirror constant.
struct MMWMixture {
  static constexpr Family kFamily = Family::MMW;

  std::vector<double> weights;
  std::vector<WeibullParams> components;
  double c = 0.0;

  int g() const { return static_cast<int>(weights.size()); }
  double pdf(double x) const;
  double cdf(double x) const;
  double sample_one(Rng& rng) const;
};

/// Posterior component membership matrix, n rows by g columns; every row
/// sums to one.
struct Responsibilities {
  std::size_t n = 0;
  std::size_t g = 0;
  std::vector<double> z;  // row-major

  double& at(std::size_t j, std::size_t i) { return z[j * g + i]; }
  double at(std::size_t j, std::size_t i) const { return z[j * g + i]; }
};

template <class ModelT>
struct FitResultT {
  ModelT model;
  std::vector<double> loglik_trace;  // observed-data log-likelihood, per iteration
  int n_iter = 0;
  bool converged = false;
  double bic = 0.0;
  int n_params = 0;
  std::vector<std::string> warnings;

  double loglik() const { return loglik_trace.back(); }
};

using FitResult = FitResultT<MMWMixture>;

double mixture_pdf(double x, const MMWMixture& m);
double mixture_cdf(double x, const MMWMixture& m);

/// Observed-data log-likelihood. A zero-density observation (including any
/// x > c) is a hard degeneracy error naming the observation.
double log_likelihood(std::span<const double> xs, const MMWMixture& m);
double log_likelihood(const ReturnSeries& returns, const MMWMixture& m);

/// Hard cluster labels for initialization; shared by the baseline families.
/// Returns an empty vector when the method produced an empty cluster, so the
/// caller can reseed.
std::vector<int> cluster_assign(std::span<const double> xs, int g, InitMethod method,
                                Rng& rng);

struct Initialization {
  std::vector<double> weights;
  std::vector<WeibullParams> params;
  Responsibilities z;
};

/// Clusters the transformed sample, then per-cluster method-of-moments
/// estimates. Reseeds up to 10 times on empty or degenerate clusters.
Initialization initialize(std::span<const double> y, const EMConfig& cfg,
                          std::uint64_t seed);

/// E-step on the mirrored axis, computed in log space with per-row max
/// subtraction.
Responsibilities e_step(std::span<const double> y, std::span<const double> weights,
                        std::span<const WeibullParams> comps);
Responsibilities e_step(std::span<const double> y, const MMWMixture& m);

struct MStepResult {
  std::vector<double> weights;
  std::vector<WeibullParams> params;
  bool all_bracketed = true;
};

/// Weighted Weibull maximum-likelihood update: weights are the column means
/// of z; each shape solves
///   1/k = sum_j z y^k ln y / sum_j z y^k - sum_j z ln y / sum_j z
/// by safeguarded bisection on [0.05, 100]; the scale is
///   (sum_j z y^k / sum_j z)^(1/k).
MStepResult m_step(std::span<const double> y, const Responsibilities& z);

FitResult fit_em(std::span<const double> xs, const EMConfig& cfg);
FitResult fit_em(const ReturnSeries& returns, const EMConfig& cfg);

/// Fits every g in g_range and returns the lowest-BIC result, ties broken
/// toward the smaller g. BIC = (3g - 1) ln n - 2 loglik.
FitResult select_g(std::span<const double> xs, std::span<const int> g_range,
                   const EMConfig& cfg);
FitResult select_g(const ReturnSeries& returns, std::span<const int> g_range,
                   const EMConfig& cfg);

inline constexpr int kDefaultGRange[] = {1, 2, 3, 4};

}  // namespace mixvar
