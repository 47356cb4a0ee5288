#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "mixvar/backtest.hpp"
#include "mixvar/baselines.hpp"
#include "mixvar/mixture.hpp"
#include "mixvar/var.hpp"

namespace mixvar {

using AnyModel = std::variant<MMWMixture, GaussianMixture, TMixture>;

/// Model-exchange document:
/// {family, g, weights[], components[...], c, loglik, bic, n_iter, converged}.
/// Component fields are family-specific ({scale, shape} for mmw,
/// {mean, variance} for gmm, {location, scale, dof} for tmm); c is null for
/// the baselines.
nlohmann::json model_to_json(const FitResult& fit);
nlohmann::json model_to_json(const GmmFitResult& fit);
nlohmann::json model_to_json(const TmmFitResult& fit);

AnyModel model_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const VaREstimate& est);
nlohmann::json to_json(const SummaryStats& stats);
nlohmann::json to_json(const BacktestReport& report);

/// FNV-1a 64-bit over raw bytes, as a 16-digit hex string. Output documents
/// embed it so reruns can be verified against the exact input file.
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace mixvar
