#include "mixvar/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "mixvar/errors.hpp"
#include "mixvar/rootfind.hpp"

namespace mixvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAscentSlack = 1e-8;

std::string format_obs(std::size_t j, double x) {
  return "observation " + std::to_string(j) + " (x = " + std::to_string(x) + ")";
}

}  // namespace

std::string to_string(InitMethod m) {
  switch (m) {
    case InitMethod::KMeans: return "kmeans";
    case InitMethod::QuantileSplit: return "quantile-split";
    case InitMethod::Random: return "random";
  }
  return "kmeans";
}

InitMethod init_method_from_string(const std::string& s) {
  if (s == "kmeans") return InitMethod::KMeans;
  if (s == "quantile-split" || s == "quantile") return InitMethod::QuantileSplit;
  if (s == "random") return InitMethod::Random;
  throw std::invalid_argument("unknown init method '" + s + "'");
}

void validate(const EMConfig& cfg) {
  if (cfg.g < 1) throw std::invalid_argument("EMConfig: g must be >= 1");
  if (cfg.max_iter < 1) throw std::invalid_argument("EMConfig: max_iter must be >= 1");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("EMConfig: tol must be > 0");
  if (cfg.n_starts < 1) throw std::invalid_argument("EMConfig: n_starts must be >= 1");
}

double MMWMixture::pdf(double x) const { return mixture_pdf(x, *this); }
double MMWMixture::cdf(double x) const { return mixture_cdf(x, *this); }

double MMWMixture::sample_one(Rng& rng) const {
  const double u = rng.u01();
  double cum = 0.0;
  std::size_t i = 0;
  for (; i + 1 < weights.size(); ++i) {
    cum += weights[i];
    if (u <= cum) break;
  }
  return mw_quantile(rng.u01(), {components[i].scale, components[i].shape, c});
}

double mixture_pdf(double x, const MMWMixture& m) {
  double sum = 0.0;
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    sum += m.weights[i] * mw_pdf(x, {m.components[i].scale, m.components[i].shape, m.c});
  }
  return sum;
}

double mixture_cdf(double x, const MMWMixture& m) {
  double sum = 0.0;
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    sum += m.weights[i] * mw_cdf(x, {m.components[i].scale, m.components[i].shape, m.c});
  }
  return sum;
}

namespace {

/// ln sum_i w_i f_MW(x; comp_i), with max subtraction.
double log_mixture_pdf(double x, const MMWMixture& m, std::span<const double> log_w) {
  double max_term = -kInf;
  double terms[64];
  const std::size_t g = m.weights.size();
  for (std::size_t i = 0; i < g; ++i) {
    const double t =
        log_w[i] + mw_log_pdf(x, {m.components[i].scale, m.components[i].shape, m.c});
    terms[i] = t;
    max_term = std::max(max_term, t);
  }
  if (!std::isfinite(max_term)) return max_term;
  double sum = 0.0;
  for (std::size_t i = 0; i < g; ++i) sum += std::exp(terms[i] - max_term);
  return max_term + std::log(sum);
}

std::vector<double> log_weights(std::span<const double> weights) {
  std::vector<double> lw(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    lw[i] = weights[i] > 0.0 ? std::log(weights[i]) : -kInf;
  }
  return lw;
}

}  // namespace

double log_likelihood(std::span<const double> xs, const MMWMixture& m) {
  if (m.weights.empty() || m.weights.size() > 64) {
    throw std::invalid_argument("log_likelihood: unsupported component count");
  }
  const std::vector<double> lw = log_weights(m.weights);
  double total = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double lj = log_mixture_pdf(xs[j], m, lw);
    if (!std::isfinite(lj)) {
      throw FitError("likelihood degeneracy: non-finite mixture density at " +
                     format_obs(j, xs[j]));
    }
    total += lj;
  }
  return total;
}

double log_likelihood(const ReturnSeries& returns, const MMWMixture& m) {
  return log_likelihood(std::span<const double>(returns.values), m);
}

std::vector<int> cluster_assign(std::span<const double> xs, int g, InitMethod method,
                                Rng& rng) {
  const std::size_t n = xs.size();
  std::vector<int> assign(n, 0);
  if (g == 1) return assign;

  auto has_empty = [&](const std::vector<int>& a) {
    std::vector<int> cnt(g, 0);
    for (const int k : a) ++cnt[k];
    return std::any_of(cnt.begin(), cnt.end(), [](int c) { return c == 0; });
  };

  switch (method) {
    case InitMethod::KMeans: {
      // seeded 1-D Lloyd iterations; centroids start at distinct data values
      std::vector<double> centroids;
      for (int tries = 0; tries < 200 && static_cast<int>(centroids.size()) < g; ++tries) {
        const double v = xs[rng.uniform_index(n)];
        if (std::none_of(centroids.begin(), centroids.end(),
                         [&](double c) { return c == v; })) {
          centroids.push_back(v);
        }
      }
      if (static_cast<int>(centroids.size()) < g) return {};
      for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t j = 0; j < n; ++j) {
          int best = 0;
          double best_d = std::fabs(xs[j] - centroids[0]);
          for (int i = 1; i < g; ++i) {
            const double d = std::fabs(xs[j] - centroids[i]);
            if (d < best_d) {
              best_d = d;
              best = i;
            }
          }
          if (assign[j] != best) {
            assign[j] = best;
            changed = true;
          }
        }
        std::vector<double> sum(g, 0.0);
        std::vector<int> cnt(g, 0);
        for (std::size_t j = 0; j < n; ++j) {
          sum[assign[j]] += xs[j];
          ++cnt[assign[j]];
        }
        for (int i = 0; i < g; ++i) {
          if (cnt[i] == 0) return {};
          centroids[i] = sum[i] / cnt[i];
        }
        if (!changed) break;
      }
      return assign;
    }
    case InitMethod::QuantileSplit: {
      // deterministic equal-count blocks of the sorted sample
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
      for (std::size_t rank = 0; rank < n; ++rank) {
        assign[order[rank]] =
            std::min(g - 1, static_cast<int>((rank * static_cast<std::size_t>(g)) / n));
      }
      return has_empty(assign) ? std::vector<int>{} : assign;
    }
    case InitMethod::Random: {
      for (std::size_t j = 0; j < n; ++j) {
        assign[j] = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(g)));
      }
      return has_empty(assign) ? std::vector<int>{} : assign;
    }
  }
  return {};
}

Initialization initialize(std::span<const double> y, const EMConfig& cfg,
                          std::uint64_t seed) {
  validate(cfg);
  const std::size_t n = y.size();
  const int g = cfg.g;
  if (n < 2 * static_cast<std::size_t>(g)) {
    throw std::invalid_argument("initialize: need at least 2g = " + std::to_string(2 * g) +
                                " observations, got " + std::to_string(n));
  }

  std::string last_error = "no usable clustering";
  for (int attempt = 0; attempt < 10; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    const std::vector<int> assign = cluster_assign(y, g, cfg.init, rng);
    if (assign.empty()) {
      last_error = "empty cluster from " + to_string(cfg.init) + " assignment";
      continue;
    }
    try {
      Initialization init;
      init.weights.assign(g, 0.0);
      init.params.resize(g);
      init.z = Responsibilities{n, static_cast<std::size_t>(g),
                                std::vector<double>(n * g, 0.0)};
      for (std::size_t j = 0; j < n; ++j) {
        init.z.at(j, static_cast<std::size_t>(assign[j])) = 1.0;
      }
      for (int i = 0; i < g; ++i) {
        std::vector<double> w(n);
        double cnt = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          w[j] = init.z.at(j, static_cast<std::size_t>(i));
          cnt += w[j];
        }
        // pi_i^(0) = (sum_j z_ij) / n
        init.weights[i] = cnt / static_cast<double>(n);
        init.params[i] = mom_estimate(y, w).params;
      }
      return init;
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw FitError("initialization failed after 10 attempts: " + last_error);
}

Responsibilities e_step(std::span<const double> y, std::span<const double> weights,
                        std::span<const WeibullParams> comps) {
  const std::size_t n = y.size();
  const std::size_t g = weights.size();
  if (g == 0 || g != comps.size()) {
    throw std::invalid_argument("e_step: weights/components size mismatch");
  }
  const std::vector<double> lw = log_weights(weights);
  Responsibilities z{n, g, std::vector<double>(n * g)};
  std::vector<double> row(g);
  for (std::size_t j = 0; j < n; ++j) {
    double max_term = -kInf;
    for (std::size_t i = 0; i < g; ++i) {
      row[i] = lw[i] + weibull_log_pdf(y[j], comps[i]);
      max_term = std::max(max_term, row[i]);
    }
    if (!std::isfinite(max_term)) {
      throw FitError("e_step degeneracy: no component has positive density at " +
                     format_obs(j, y[j]));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      row[i] = std::exp(row[i] - max_term);
      sum += row[i];
    }
    for (std::size_t i = 0; i < g; ++i) z.at(j, i) = row[i] / sum;
  }
  return z;
}

Responsibilities e_step(std::span<const double> y, const MMWMixture& m) {
  return e_step(y, m.weights, m.components);
}

MStepResult m_step(std::span<const double> y, const Responsibilities& z) {
  const std::size_t n = y.size();
  const std::size_t g = z.g;
  if (z.n != n) throw std::invalid_argument("m_step: responsibility/sample size mismatch");

  std::vector<double> log_y(n);
  for (std::size_t j = 0; j < n; ++j) log_y[j] = std::log(y[j]);

  MStepResult out;
  out.weights.resize(g);
  out.params.resize(g);

  for (std::size_t i = 0; i < g; ++i) {
    double col_sum = 0.0;
    double col_log = 0.0;
    double comp_max_ly = -kInf;  // over observations the component owns
    for (std::size_t j = 0; j < n; ++j) {
      const double w = z.at(j, i);
      col_sum += w;
      col_log += w * log_y[j];
      if (w > 0.0) comp_max_ly = std::max(comp_max_ly, log_y[j]);
    }
    if (col_sum < 1e-10) {
      throw FitError("component collapse: column " + std::to_string(i) +
                     " of the responsibilities sums to ~0");
    }
    out.weights[i] = col_sum / static_cast<double>(n);
    const double mean_log = col_log / col_sum;

    double var_log = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = log_y[j] - mean_log;
      var_log += z.at(j, i) * d * d;
    }
    var_log /= col_sum;
    if (var_log < 1e-16) {
      throw FitError("component collapse: degenerate spread in component " +
                     std::to_string(i));
    }

    // 1/k - [ sum z y^k ln y / sum z y^k - mean_log ] = 0, strictly decreasing
    // in k. Powers are shifted by the component's own maximum so the
    // denominator keeps at least one nonzero term; zero-responsibility and
    // underflowing terms contribute nothing and are skipped.
    auto shape_eq = [&](double k) {
      const double shift = k * comp_max_ly;
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double w = z.at(j, i);
        if (w == 0.0) continue;
        const double t = k * log_y[j] - shift;
        if (t < -745.0) continue;
        const double e = w * std::exp(t);
        den += e;
        num += e * log_y[j];
      }
      return 1.0 / k - (num / den - mean_log);
    };

    // 1e-9 on the log axis keeps the Q-function error far below the EM
    // ascent slack while the safeguarded steps keep convergence unconditional
    const RootResult root = safeguarded_bisect_log(shape_eq, kShapeMin, kShapeMax);
    if (!root.bracketed) out.all_bracketed = false;
    const double shape = root.x;

    // scale = (sum z y^k / sum z)^(1/k), in log space
    const double shift = shape * comp_max_ly;
    double pow_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = z.at(j, i);
      if (w == 0.0) continue;
      const double t = shape * log_y[j] - shift;
      if (t < -745.0) continue;
      pow_sum += w * std::exp(t);
    }
    const double scale = std::exp((shift + std::log(pow_sum) - std::log(col_sum)) / shape);
    out.params[i] = {scale, shape};
  }
  return out;
}

namespace {

/// Observed-data log-likelihood evaluated on the mirrored axis; equal to the
/// return-axis likelihood because the reflection has unit Jacobian.
double weibull_mixture_loglik(std::span<const double> y, std::span<const double> weights,
                              std::span<const WeibullParams> comps) {
  const std::vector<double> lw = log_weights(weights);
  const std::size_t g = weights.size();
  double total = 0.0;
  std::vector<double> row(g);
  for (std::size_t j = 0; j < y.size(); ++j) {
    double max_term = -kInf;
    for (std::size_t i = 0; i < g; ++i) {
      row[i] = lw[i] + weibull_log_pdf(y[j], comps[i]);
      max_term = std::max(max_term, row[i]);
    }
    if (!std::isfinite(max_term)) {
      throw FitError("likelihood degeneracy: non-finite mixture density at " +
                     format_obs(j, y[j]));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < g; ++i) sum += std::exp(row[i] - max_term);
    total += max_term + std::log(sum);
  }
  return total;
}

FitResult run_single_start(std::span<const double> y, double c, const EMConfig& cfg,
                           std::uint64_t start_seed) {
  const std::size_t n = y.size();
  Initialization init = initialize(y, cfg, start_seed);

  MMWMixture model{init.weights, init.params, c};
  FitResult fit;
  fit.n_params = 3 * cfg.g - 1;

  double l_prev = weibull_mixture_loglik(y, model.weights, model.components);
  fit.loglik_trace.push_back(l_prev);

  const double min_weight = 1.0 / (2.0 * static_cast<double>(n));
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Responsibilities z = e_step(y, model.weights, model.components);
    MStepResult ms = m_step(y, z);
    if (!ms.all_bracketed) {
      fit.warnings.push_back("shape clamped to bracket edge at iteration " +
                             std::to_string(k));
    }
    if (*std::min_element(ms.weights.begin(), ms.weights.end()) < min_weight) {
      throw FitError("component collapse: weight fell below 1/(2n) at iteration " +
                     std::to_string(k));
    }
    model.weights = std::move(ms.weights);
    model.components = std::move(ms.params);

    const double l = weibull_mixture_loglik(y, model.weights, model.components);
    fit.loglik_trace.push_back(l);
    fit.n_iter = k;
    if (l < l_prev - kAscentSlack) {
      throw FitError("EM ascent violated at iteration " + std::to_string(k) + ": " +
                     std::to_string(l_prev) + " -> " + std::to_string(l));
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

}  // namespace

FitResult fit_em(std::span<const double> xs, const EMConfig& cfg) {
  validate(cfg);
  const std::size_t n = xs.size();
  if (n < 2 * static_cast<std::size_t>(cfg.g)) {
    throw std::invalid_argument("fit_em: need at least 2g observations");
  }

  const double c = mirror_constant(xs);
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = c - xs[j];

  std::optional<FitResult> best;
  std::vector<std::string> diagnostics;
  for (int s = 0; s < cfg.n_starts; ++s) {
    EMConfig start_cfg = cfg;
    // a deterministic init repeated across starts adds nothing; later starts
    // fall back to seeded k-means
    if (s > 0 && cfg.init == InitMethod::QuantileSplit) {
      start_cfg.init = InitMethod::KMeans;
    }
    try {
      FitResult fr = run_single_start(y, c, start_cfg,
                                      derive_seed(cfg.seed, static_cast<std::uint64_t>(s)));
      if (!best || fr.loglik() > best->loglik()) best = std::move(fr);
    } catch (const std::exception& e) {
      diagnostics.push_back("start " + std::to_string(s) + ": " + e.what());
    }
  }
  if (!best) {
    std::string msg = "fit_em: all " + std::to_string(cfg.n_starts) + " starts failed";
    for (const auto& d : diagnostics) msg += "; " + d;
    throw FitError(msg);
  }
  best->model.c = c;
  best->bic = best->n_params * std::log(static_cast<double>(n)) - 2.0 * best->loglik();
  for (const auto& d : diagnostics) best->warnings.push_back(d);
  return *best;
}

FitResult fit_em(const ReturnSeries& returns, const EMConfig& cfg) {
  return fit_em(std::span<const double>(returns.values), cfg);
}

FitResult select_g(std::span<const double> xs, std::span<const int> g_range,
                   const EMConfig& cfg) {
  if (g_range.empty()) throw std::invalid_argument("select_g: empty g range");
  std::vector<int> order(g_range.begin(), g_range.end());
  std::sort(order.begin(), order.end());

  std::optional<FitResult> best;
  std::vector<std::string> failures;
  for (const int g : order) {
    EMConfig cfg_g = cfg;
    cfg_g.g = g;
    try {
      FitResult fr = fit_em(xs, cfg_g);
      if (!best || fr.bic < best->bic) best = std::move(fr);  // ties keep smaller g
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

FitResult select_g(const ReturnSeries& returns, std::span<const int> g_range,
                   const EMConfig& cfg) {
  return select_g(std::span<const double>(returns.values), g_range, cfg);
}

}  // namespace mixvar
