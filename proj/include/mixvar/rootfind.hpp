#pragma once

#include <cmath>

namespace mixvar {

struct RootResult {
  double x = 0.0;
  bool bracketed = false;
};

/// Bisection on [lo, hi] down to |hi - lo| <= xtol. If the endpoints do not
/// straddle a sign change, returns the endpoint with the smaller |f| and
/// bracketed = false; callers treat that as a clamped solution.
template <class F>
RootResult bisect(F&& f, double lo, double hi, double xtol, int max_iter = 256) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return {lo, true};
  if (fhi == 0.0) return {hi, true};
  if ((flo > 0.0) == (fhi > 0.0)) {
    return {std::fabs(flo) <= std::fabs(fhi) ? lo : hi, false};
  }
  for (int i = 0; i < max_iter && (hi - lo) > xtol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return {mid, true};
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), true};
}

/// Bisection with the tolerance measured on the log-transformed axis.
/// Shape-parameter equations are solved on the log axis so the resolution
/// stays uniform across [0.05, 100].
template <class F>
RootResult bisect_log(F&& f, double lo, double hi, double log_tol = 1e-12,
                      int max_iter = 256) {
  auto g = [&](double t) { return f(std::exp(t)); };
  RootResult r = bisect(g, std::log(lo), std::log(hi), log_tol, max_iter);
  r.x = std::exp(r.x);
  return r;
}

/// Safeguarded bisection on the log axis (Brent's method): inverse
/// quadratic / secant steps accepted only while they outpace bisection,
/// plain bisection otherwise. Convergence is unconditional, with far fewer
/// function evaluations on smooth equations; the hot M-step solve uses
/// this. The tolerance is measured on the log axis.
template <class F>
RootResult safeguarded_bisect_log(F&& f, double lo, double hi, double log_tol = 1e-9,
                                  int max_iter = 128) {
  auto g = [&](double t) { return f(std::exp(t)); };
  double a = std::log(lo);
  double b = std::log(hi);
  double fa = g(a);
  double fb = g(b);
  if (fa == 0.0) return {lo, true};
  if (fb == 0.0) return {hi, true};
  if ((fa > 0.0) == (fb > 0.0)) {
    return {std::fabs(fa) <= std::fabs(fb) ? lo : hi, false};
  }
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * 2.220446049250313e-16 * std::fabs(b) + 0.5 * log_tol;
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || fb == 0.0) return {std::exp(b), true};
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {  // secant
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {  // inverse quadratic
        q = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::fabs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = g(b);
  }
  return {std::exp(b), true};
}

}  // namespace mixvar
