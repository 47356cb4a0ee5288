#include "mixvar/json_io.hpp"

#include <cstdint>
#include <cstdio>

#include "mixvar/errors.hpp"

namespace mixvar {

namespace {

template <class FitT>
nlohmann::json fit_common(const FitT& fit, Family family) {
  nlohmann::json doc;
  doc["family"] = to_string(family);
  doc["g"] = fit.model.g();
  doc["weights"] = fit.model.weights;
  doc["loglik"] = fit.loglik();
  doc["bic"] = fit.bic;
  doc["n_iter"] = fit.n_iter;
  doc["converged"] = fit.converged;
  doc["n_params"] = fit.n_params;
  if (!fit.warnings.empty()) doc["warnings"] = fit.warnings;
  return doc;
}

}  // namespace

nlohmann::json model_to_json(const FitResult& fit) {
  nlohmann::json doc = fit_common(fit, Family::MMW);
  doc["c"] = fit.model.c;
  auto& comps = doc["components"] = nlohmann::json::array();
  for (const WeibullParams& p : fit.model.components) {
    comps.push_back({{"scale", p.scale}, {"shape", p.shape}});
  }
  return doc;
}

nlohmann::json model_to_json(const GmmFitResult& fit) {
  nlohmann::json doc = fit_common(fit, Family::GMM);
  doc["c"] = nullptr;
  auto& comps = doc["components"] = nlohmann::json::array();
  for (int i = 0; i < fit.model.g(); ++i) {
    comps.push_back({{"mean", fit.model.means[i]}, {"variance", fit.model.variances[i]}});
  }
  return doc;
}

nlohmann::json model_to_json(const TmmFitResult& fit) {
  nlohmann::json doc = fit_common(fit, Family::TMM);
  doc["c"] = nullptr;
  auto& comps = doc["components"] = nlohmann::json::array();
  for (int i = 0; i < fit.model.g(); ++i) {
    comps.push_back({{"location", fit.model.locations[i]},
                     {"scale", fit.model.scales[i]},
                     {"dof", fit.model.dofs[i]}});
  }
  return doc;
}

AnyModel model_from_json(const nlohmann::json& doc) {
  const Family family = family_from_string(doc.at("family").get<std::string>());
  const auto weights = doc.at("weights").get<std::vector<double>>();
  const auto& comps = doc.at("components");
  if (weights.size() != comps.size()) {
    throw SchemaError("model document: weights/components size mismatch");
  }
  switch (family) {
    case Family::MMW: {
      MMWMixture m;
      m.weights = weights;
      m.c = doc.at("c").get<double>();
      for (const auto& comp : comps) {
        m.components.push_back(
            {comp.at("scale").get<double>(), comp.at("shape").get<double>()});
      }
      return m;
    }
    case Family::GMM: {
      GaussianMixture m;
      m.weights = weights;
      for (const auto& comp : comps) {
        m.means.push_back(comp.at("mean").get<double>());
        m.variances.push_back(comp.at("variance").get<double>());
      }
      return m;
    }
    case Family::TMM: {
      TMixture m;
      m.weights = weights;
      for (const auto& comp : comps) {
        m.locations.push_back(comp.at("location").get<double>());
        m.scales.push_back(comp.at("scale").get<double>());
        m.dofs.push_back(comp.at("dof").get<double>());
      }
      return m;
    }
  }
  throw SchemaError("model document: unknown family");
}

nlohmann::json to_json(const VaREstimate& est) {
  nlohmann::json doc;
  doc["value"] = est.value;
  doc["loss"] = est.loss;
  doc["alpha"] = est.alpha;
  doc["method"] = to_string(est.method);
  doc["family"] = est.family ? nlohmann::json(to_string(*est.family)) : nlohmann::json();
  if (est.method == VaRMethod::Simulation) doc["standard_error"] = est.standard_error;
  return doc;
}

nlohmann::json to_json(const SummaryStats& stats) {
  return {{"min", stats.min},       {"max", stats.max},
          {"mean", stats.mean},     {"std_dev", stats.std_dev},
          {"skewness", stats.skewness}, {"kurtosis", stats.kurtosis},
          {"n", stats.n}};
}

namespace {

nlohmann::json test_to_json(const TestResult& t) {
  nlohmann::json doc;
  doc["applicable"] = t.applicable;
  doc["lr"] = t.applicable ? nlohmann::json(t.statistic) : nlohmann::json();
  doc["p"] = t.applicable ? nlohmann::json(t.p_value) : nlohmann::json();
  doc["pass_at_5pct"] = t.passed_at_5pct();
  return doc;
}

}  // namespace

nlohmann::json to_json(const BacktestReport& report) {
  nlohmann::json doc;
  doc["family"] = to_string(report.family);
  doc["alpha"] = report.alpha;
  doc["window"] = report.window;
  doc["n_obs"] = report.n_obs;
  doc["n_exceed"] = report.n_exceed;
  doc["mse"] = report.mse;
  doc["failure_rate"] = report.failure_rate;
  doc["kupiec"] = test_to_json(report.kupiec);
  doc["christoffersen"] = test_to_json(report.christoffersen);

  auto& fc = doc["forecasts"] = nlohmann::json::array();
  for (const ForecastPoint& pt : report.forecasts.points) {
    nlohmann::json p;
    p["date"] = pt.date.to_string();
    p["var"] = pt.ok ? nlohmann::json(pt.model_var) : nlohmann::json();
    p["converged"] = pt.converged;
    p["hist_var"] = pt.hist_var;
    p["g"] = pt.chosen_g;
    if (!pt.ok) p["reason"] = pt.reason;
    if (pt.saturated) p["saturated"] = true;
    fc.push_back(std::move(p));
  }
  doc["exceedances"] = report.exceedances.indicators;
  return doc;
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mixvar
