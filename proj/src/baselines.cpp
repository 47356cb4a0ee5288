#include "mixvar/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "mixvar/errors.hpp"
#include "mixvar/rootfind.hpp"
#include "mixvar/special.hpp"

namespace mixvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAscentSlack = 1e-8;
constexpr double kPi = 3.14159265358979323846;

double sample_variance_mle(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return ss / n;
}

/// Row-normalized responsibilities from per-component log densities.
/// Returns the observed-data log-likelihood as a by-product.
double normalize_rows(std::vector<double>& logdens, std::size_t n, std::size_t g,
                      Responsibilities& z) {
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double max_term = -kInf;
    for (std::size_t i = 0; i < g; ++i) max_term = std::max(max_term, logdens[j * g + i]);
    if (!std::isfinite(max_term)) {
      throw FitError("likelihood degeneracy at observation " + std::to_string(j));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      const double e = std::exp(logdens[j * g + i] - max_term);
      z.z[j * g + i] = e;
      sum += e;
    }
    for (std::size_t i = 0; i < g; ++i) z.z[j * g + i] /= sum;
    total += max_term + std::log(sum);
  }
  return total;
}

void check_min_weight(const std::vector<double>& weights, std::size_t n, int iter) {
  const double min_weight = 1.0 / (2.0 * static_cast<double>(n));
  if (*std::min_element(weights.begin(), weights.end()) < min_weight) {
    throw FitError("component collapse: weight fell below 1/(2n) at iteration " +
                   std::to_string(iter));
  }
}

struct ClusterMoments {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;
};

ClusterMoments cluster_moments(std::span<const double> xs, const std::vector<int>& assign,
                               int g, double var_floor) {
  ClusterMoments m;
  m.weights.assign(g, 0.0);
  m.means.assign(g, 0.0);
  m.variances.assign(g, 0.0);
  std::vector<int> cnt(g, 0);
  for (std::size_t j = 0; j < xs.size(); ++j) {
    ++cnt[assign[j]];
    m.means[assign[j]] += xs[j];
  }
  for (int i = 0; i < g; ++i) {
    if (cnt[i] == 0) throw FitError("empty cluster in baseline initialization");
    m.means[i] /= cnt[i];
    m.weights[i] = static_cast<double>(cnt[i]) / static_cast<double>(xs.size());
  }
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double d = xs[j] - m.means[assign[j]];
    m.variances[assign[j]] += d * d;
  }
  for (int i = 0; i < g; ++i) {
    m.variances[i] = std::max(m.variances[i] / cnt[i], var_floor);
  }
  return m;
}

ClusterMoments initialize_moments(std::span<const double> xs, const EMConfig& cfg,
                                  std::uint64_t seed, double var_floor) {
  std::string last_error = "no usable clustering";
  for (int attempt = 0; attempt < 10; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    const std::vector<int> assign = cluster_assign(xs, cfg.g, cfg.init, rng);
    if (assign.empty()) {
      last_error = "empty cluster from " + to_string(cfg.init) + " assignment";
      continue;
    }
    try {
      return cluster_moments(xs, assign, cfg.g, var_floor);
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw FitError("initialization failed after 10 attempts: " + last_error);
}

// ---------------------------------------------------------------------------
// Gaussian mixture
// ---------------------------------------------------------------------------

GmmFitResult run_gmm_start(std::span<const double> xs, const EMConfig& cfg,
                           std::uint64_t seed, double var_floor) {
  const std::size_t n = xs.size();
  const std::size_t g = static_cast<std::size_t>(cfg.g);
  ClusterMoments init = initialize_moments(xs, cfg, seed, var_floor);

  GaussianMixture model{init.weights, init.means, init.variances};
  GmmFitResult fit;
  fit.n_params = 3 * cfg.g - 1;

  Responsibilities z{n, g, std::vector<double>(n * g)};
  std::vector<double> logdens(n * g);

  auto fill_logdens = [&]() {
    for (std::size_t i = 0; i < g; ++i) {
      const double lw = model.weights[i] > 0.0 ? std::log(model.weights[i]) : -kInf;
      const double inv_var = 1.0 / model.variances[i];
      const double log_norm = -0.5 * std::log(2.0 * kPi * model.variances[i]);
      for (std::size_t j = 0; j < n; ++j) {
        const double d = xs[j] - model.means[i];
        logdens[j * g + i] = lw + log_norm - 0.5 * d * d * inv_var;
      }
    }
  };

  fill_logdens();
  double l_prev = normalize_rows(logdens, n, g, z);
  fit.loglik_trace.push_back(l_prev);

  for (int k = 1; k <= cfg.max_iter; ++k) {
    // M-step from the responsibilities of the previous E-step
    for (std::size_t i = 0; i < g; ++i) {
      double s = 0.0, sx = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        s += z.z[j * g + i];
        sx += z.z[j * g + i] * xs[j];
      }
      if (s < 1e-10) throw FitError("component collapse in GMM M-step");
      const double mean = sx / s;
      double sv = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = xs[j] - mean;
        sv += z.z[j * g + i] * d * d;
      }
      model.weights[i] = s / static_cast<double>(n);
      model.means[i] = mean;
      model.variances[i] = std::max(sv / s, var_floor);
    }
    check_min_weight(model.weights, n, k);

    fill_logdens();
    const double l = normalize_rows(logdens, n, g, z);
    fit.loglik_trace.push_back(l);
    fit.n_iter = k;
    if (l < l_prev - kAscentSlack) {
      throw FitError("EM ascent violated at iteration " + std::to_string(k));
    }
    if (std::fabs(l - l_prev) < cfg.tol) {
      fit.converged = true;
      break;
    }
    l_prev = l;
  }

  fit.model = std::move(model);
  return fit;
}

// ---------------------------------------------------------------------------
// t mixture
// ---------------------------------------------------------------------------

TmmFitResult run_tmm_start(std::span<const double> xs, const EMConfig& cfg,
                           std::uint64_t seed, double var_floor) {
  const std::size_t n = xs.size();
  const std::size_t g = static_cast<std::size_t>(cfg.g);
  ClusterMoments init = initialize_moments(xs, cfg, seed, var_floor);

  TMixture model;
  model.weights = init.weights;
  model.locations = init.means;
  model.scales.resize(g);
  model.dofs.assign(g, 10.0);  // moderate-tail starting point
  for (std::size_t i = 0; i < g; ++i) model.scales[i] = std::sqrt(init.variances[i]);

  TmmFitResult fit;
  fit.n_params = 4 * cfg.g - 1;

  Responsibilities z{n, g, std::vector<double>(n * g)};
  std::vector<double> logdens(n * g);
  std::vector<double> u(n * g);  // gamma weights

  auto fill_logdens = [&]() {
    for (std::size_t i = 0; i < g; ++i) {
      const double nu = model.dofs[i];
      const double lw = model.weights[i] > 0.0 ? std::log(model.weights[i]) : -kInf;
      const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                              0.5 * std::log(nu * kPi) - std::log(model.scales[i]);
      for (std::size_t j = 0; j < n; ++j) {
        const double t = (xs[j] - model.locations[i]) / model.scales[i];
        logdens[j * g + i] = lw + log_norm - 0.5 * (nu + 1.0) * std::log1p(t * t / nu);
      }
    }
  };

  auto fill_u = [&]() {
    for (std::size_t i = 0; i < g; ++i) {
      const double nu = model.dofs[i];
      for (std::size_t j = 0; j < n; ++j) {
        const double t = (xs[j] - model.locations[i]) / model.scales[i];
        u[j * g + i] = (nu + 1.0) / (nu + t * t);
      }
    }
  };

  fill_logdens();
  double l_prev = normalize_rows(logdens, n, g, z);
  fit.loglik_trace.push_back(l_prev);

  for (int k = 1; k <= cfg.max_iter; ++k) {
    fill_u();
    for (std::size_t i = 0; i < g; ++i) {
      double s = 0.0, szu = 0.0, szux = 0.0, slogu = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double zj = z.z[j * g + i];
        const double uj = u[j * g + i];
        s += zj;
        szu += zj * uj;
        szux += zj * uj * xs[j];
        slogu += zj * (std::log(uj) - uj);
      }
      if (s < 1e-10) throw FitError("component collapse in tMM M-step");
      const double mu = szux / szu;
      double sv = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = xs[j] - mu;
        sv += z.z[j * g + i] * u[j * g + i] * d * d;
      }
      model.weights[i] = s / static_cast<double>(n);
      model.locations[i] = mu;
      model.scales[i] = std::sqrt(std::max(sv / s, var_floor));

      // Liu-Rubin dof equation; the averaged log u - u term is constant
      // during the solve.
      const double avg_logu = slogu / s;
      const double nu_old = model.dofs[i];
      const double anchor = digamma(0.5 * (nu_old + 1.0)) - std::log(0.5 * (nu_old + 1.0));
      auto dof_eq = [&](double nu) {
        return -digamma(0.5 * nu) + std::log(0.5 * nu) + 1.0 + avg_logu + anchor;
      };
      const RootResult root = bisect_log(dof_eq, kDofMin, kDofMax);
      model.dofs[i] = root.x;
      if (!root.bracketed && root.x >= kDofMax * 0.999) {
        fit.warnings.push_back("component " + std::to_string(i) +
                               " dof clamped at bracket edge (near-Gaussian)");
      }
    }
    check_min_weight(model.weights, n, k);

    fill_logdens();
    const double l = normalize_rows(logdens, n, g, z);
    fit.loglik_trace.push_back(l);
    fit.n_iter = k;
    if (l < l_prev - kAscentSlack) {
      throw FitError("EM ascent violated at iteration " + std::to_string(k));
    }
    if (std::fabs(l - l_prev) < cfg.tol) {
      fit.converged = true;
      break;
    }
    l_prev = l;
  }

  fit.model = std::move(model);
  return fit;
}

// ---------------------------------------------------------------------------
// shared driver
// ---------------------------------------------------------------------------

template <class RunFn, class ResultT>
ResultT multi_start(RunFn run, std::span<const double> xs, const EMConfig& cfg) {
  validate(cfg);
  if (xs.size() < 2 * static_cast<std::size_t>(cfg.g)) {
    throw std::invalid_argument("mixture fit: need at least 2g observations");
  }
  const double var_floor = 1e-8 * sample_variance_mle(xs);
  if (!(var_floor > 0.0)) {
    throw FitError("degenerate sample: zero variance");
  }

  std::optional<ResultT> best;
  std::vector<std::string> diagnostics;
  for (int s = 0; s < cfg.n_starts; ++s) {
    EMConfig start_cfg = cfg;
    if (s > 0 && cfg.init == InitMethod::QuantileSplit) {
      start_cfg.init = InitMethod::KMeans;
    }
    try {
      ResultT fr = run(xs, start_cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(s)),
                       var_floor);
      if (!best || fr.loglik() > best->loglik()) best = std::move(fr);
    } catch (const std::exception& e) {
      diagnostics.push_back("start " + std::to_string(s) + ": " + e.what());
    }
  }
  if (!best) {
    std::string msg = "all " + std::to_string(cfg.n_starts) + " starts failed";
    for (const auto& d : diagnostics) msg += "; " + d;
    throw FitError(msg);
  }
  best->bic =
      best->n_params * std::log(static_cast<double>(xs.size())) - 2.0 * best->loglik();
  return *best;
}

template <class FitFn, class ResultT>
ResultT select_g_impl(FitFn fit, std::span<const double> xs, std::span<const int> g_range,
                      const EMConfig& cfg) {
  if (g_range.empty()) throw std::invalid_argument("select_g: empty g range");
  std::vector<int> order(g_range.begin(), g_range.end());
  std::sort(order.begin(), order.end());

  std::optional<ResultT> best;
  std::vector<std::string> failures;
  for (const int g : order) {
    EMConfig cfg_g = cfg;
    cfg_g.g = g;
    try {
      ResultT fr = fit(xs, cfg_g);
      if (!best || fr.bic < best->bic) best = std::move(fr);
    } catch (const std::exception& e) {
      failures.push_back("g=" + std::to_string(g) + ": " + e.what());
    }
  }
  if (!best) {
    std::string msg = "select_g: every component count failed";
    for (const auto& f : failures) msg += "; " + f;
    throw FitError(msg);
  }
  return *best;
}

}  // namespace

double GaussianMixture::pdf(double x) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double d = x - means[i];
    sum += weights[i] * std::exp(-0.5 * d * d / variances[i]) /
           std::sqrt(2.0 * kPi * variances[i]);
  }
  return sum;
}

double GaussianMixture::cdf(double x) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    sum += weights[i] * normal_cdf((x - means[i]) / std::sqrt(variances[i]));
  }
  return sum;
}

double GaussianMixture::sample_one(Rng& rng) const {
  const double u = rng.u01();
  double cum = 0.0;
  std::size_t i = 0;
  for (; i + 1 < weights.size(); ++i) {
    cum += weights[i];
    if (u <= cum) break;
  }
  return means[i] + std::sqrt(variances[i]) * rng.normal();
}

double TMixture::pdf(double x) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    sum += weights[i] * student_t_pdf((x - locations[i]) / scales[i], dofs[i]) / scales[i];
  }
  return sum;
}

double TMixture::cdf(double x) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    sum += weights[i] * student_t_cdf((x - locations[i]) / scales[i], dofs[i]);
  }
  return sum;
}

double TMixture::sample_one(Rng& rng) const {
  const double u = rng.u01();
  double cum = 0.0;
  std::size_t i = 0;
  for (; i + 1 < weights.size(); ++i) {
    cum += weights[i];
    if (u <= cum) break;
  }
  // t = z / sqrt(V / nu), V ~ chi^2_nu
  const double z = rng.normal();
  const double v = 2.0 * rng.gamma(0.5 * dofs[i]);
  return locations[i] + scales[i] * z / std::sqrt(v / dofs[i]);
}

GmmFitResult fit_gmm(std::span<const double> xs, const EMConfig& cfg) {
  return multi_start<decltype(&run_gmm_start), GmmFitResult>(run_gmm_start, xs, cfg);
}

GmmFitResult fit_gmm(const ReturnSeries& returns, const EMConfig& cfg) {
  return fit_gmm(std::span<const double>(returns.values), cfg);
}

TmmFitResult fit_tmm(std::span<const double> xs, const EMConfig& cfg) {
  return multi_start<decltype(&run_tmm_start), TmmFitResult>(run_tmm_start, xs, cfg);
}

TmmFitResult fit_tmm(const ReturnSeries& returns, const EMConfig& cfg) {
  return fit_tmm(std::span<const double>(returns.values), cfg);
}

GmmFitResult select_g_gmm(std::span<const double> xs, std::span<const int> g_range,
                          const EMConfig& cfg) {
  auto fit = [](std::span<const double> data, const EMConfig& c) { return fit_gmm(data, c); };
  return select_g_impl<decltype(fit), GmmFitResult>(fit, xs, g_range, cfg);
}

TmmFitResult select_g_tmm(std::span<const double> xs, std::span<const int> g_range,
                          const EMConfig& cfg) {
  auto fit = [](std::span<const double> data, const EMConfig& c) { return fit_tmm(data, c); };
  return select_g_impl<decltype(fit), TmmFitResult>(fit, xs, g_range, cfg);
}

}  // namespace mixvar
