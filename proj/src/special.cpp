#include "mixvar/special.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <stdexcept>

namespace mixvar {

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma requires x > 0");
  return std::lgamma(x);
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma requires x > 0");
  return boost::math::digamma(x);
}

double chi2_sf_1df(double x) {
  if (x < 0.0) throw std::domain_error("chi2_sf_1df requires x >= 0");
  return std::erfc(std::sqrt(0.5 * x));
}

double normal_pdf(double z) {
  static const double kInvSqrt2Pi = 0.39894228040143267794;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double normal_cdf(double z) {
  static const double kInvSqrt2 = 0.70710678118654752440;
  return 0.5 * std::erfc(-z * kInvSqrt2);
}

double student_t_pdf(double t, double dof) {
  if (!(dof > 0.0)) throw std::domain_error("student_t_pdf requires dof > 0");
  const double log_norm = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                          0.5 * std::log(dof * 3.14159265358979323846);
  return std::exp(log_norm - 0.5 * (dof + 1.0) * std::log1p(t * t / dof));
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw std::domain_error("student_t_cdf requires dof > 0");
  boost::math::students_t dist(dof);
  return boost::math::cdf(dist, t);
}

double weibull_cv_squared(double shape) {
  if (!(shape > 0.0)) throw std::domain_error("weibull_cv_squared requires shape > 0");
  // Gamma(1+2/s) / Gamma(1+1/s)^2 - 1, assembled in log space so the small
  // shapes (Gamma of large arguments) do not overflow.
  return std::expm1(std::lgamma(1.0 + 2.0 / shape) - 2.0 * std::lgamma(1.0 + 1.0 / shape));
}

}  // namespace mixvar
