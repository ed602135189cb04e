#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace dwell {

namespace detail {

inline double simpson_rule(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson_rec(F&& f, double a, double fa, double b, double fb, double m, double fm, double whole,
                            double atol, double rtol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson_rule(a, fa, m, fm, flm);
  const double right = simpson_rule(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * (atol + rtol * std::abs(left + right)))
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * atol, rtol, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * atol, rtol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature with Richardson correction. Reversed bounds
/// flip the sign. atol is absolute, rtol is measured against each
/// subinterval's own estimate.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double atol = 1e-12, double rtol = 1e-10, int max_depth = 48) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
    throw std::runtime_error("adaptive_simpson: non-finite integrand");
  const double whole = detail::simpson_rule(a, fa, b, fb, fm);
  return sign * detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, atol, rtol, max_depth);
}

/// Minimizes a scalar function on [a, b] by golden-section search; assumes
/// unimodality for the fast path, callers scan a grid first when in doubt.
template <typename F>
double golden_section_min(F&& f, double a, double b, int iters = 80, double x_tol = 0.0) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int k = 0; k < iters && (b - a) > x_tol; ++k) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace dwell
