#pragma once

namespace mixvar {

/// ln Gamma(x) for x > 0.
double log_gamma(double x);

/// Digamma psi(x) for x > 0.
double digamma(double x);

/// Upper-tail probability of a chi-square with one degree of freedom,
/// computed through the complementary error function of sqrt(x/2).
double chi2_sf_1df(double x);

double normal_pdf(double z);
double normal_cdf(double z);

/// Density and CDF of the standard Student t with `dof` degrees of freedom.
double student_t_pdf(double t, double dof);
double student_t_cdf(double t, double dof);

/// Squared coefficient of variation of a Weibull with the given shape:
/// [Gamma(1 + 2/shape) - Gamma(1 + 1/shape)^2] / Gamma(1 + 1/shape)^2.
/// Strictly decreasing in the shape; the method-of-moments solve inverts it.
double weibull_cv_squared(double shape);

}  // namespace mixvar
