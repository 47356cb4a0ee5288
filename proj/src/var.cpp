#include "mixvar/var.hpp"

#include <algorithm>
#include <cmath>

namespace mixvar {

std::string to_string(VaRMethod m) {
  switch (m) {
    case VaRMethod::CdfBisection: return "cdf-bisection";
    case VaRMethod::Simulation: return "simulation";
    case VaRMethod::Historical: return "historical";
  }
  return "unknown";
}

VaRMethod var_method_from_string(const std::string& s) {
  if (s == "cdf-bisection" || s == "cdf") return VaRMethod::CdfBisection;
  if (s == "simulation" || s == "sim") return VaRMethod::Simulation;
  if (s == "historical" || s == "hist") return VaRMethod::Historical;
  throw std::invalid_argument("unknown VaR method '" + s + "'");
}

void validate(const VaRRequest& req) {
  if (!(req.alpha > 0.0 && req.alpha < 0.5)) {
    throw std::invalid_argument("VaR tail probability must lie in (0, 0.5), got " +
                                std::to_string(req.alpha));
  }
  if (req.method == VaRMethod::Simulation && req.n_sim < 10'000) {
    throw std::invalid_argument("VaRRequest: n_sim must be at least 10^4");
  }
}

VaREstimate historical_var(std::span<const double> values, double alpha) {
  detail::check_alpha(alpha);
  const std::size_t needed = static_cast<std::size_t>(std::ceil(1.0 / alpha));
  if (values.size() < needed) {
    throw std::invalid_argument("historical_var: need at least " + std::to_string(needed) +
                                " observations for alpha = " + std::to_string(alpha) +
                                ", got " + std::to_string(values.size()));
  }
  std::vector<double> copy(values.begin(), values.end());
  VaREstimate est;
  est.alpha = alpha;
  est.method = VaRMethod::Historical;
  est.value = detail::interpolated_quantile(copy, alpha);
  est.loss = -est.value;
  return est;
}

VaREstimate historical_var(const ReturnSeries& returns, double alpha) {
  return historical_var(std::span<const double>(returns.values), alpha);
}

}  // namespace mixvar
