#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

namespace dwell {

/// Scalar comparison function (class K or K-infinity): continuous, zero at
/// zero, strictly increasing. Inverse and derivative evaluators are
/// optional; a bracketing inverse is available through invert() either way.
struct ComparisonFunction {
  enum class Class { K, KInf };

  std::function<double(double)> f;
  Class cls = Class::K;
  std::function<double(double)> inverse;     // may be empty
  std::function<double(double)> derivative;  // may be empty

  double operator()(double s) const { return f(s); }

  /// Builds with the membership smoke checks: f(0) = 0, strictly increasing
  /// on a log-spaced sample grid, and (for K-infinity) large at a large
  /// probe value.
  static ComparisonFunction checked(std::function<double(double)> fn, Class cls,
                                    std::function<double(double)> inverse = nullptr,
                                    std::function<double(double)> derivative = nullptr) {
    if (!fn) throw std::invalid_argument("ComparisonFunction: missing evaluator");
    if (std::abs(fn(0.0)) > 0.0) throw std::invalid_argument("ComparisonFunction: f(0) must be 0");
    double prev_s = 0.0, prev_v = 0.0;
    for (int k = -24; k <= 24; ++k) {
      const double s = std::pow(10.0, 0.25 * static_cast<double>(k));
      const double v = fn(s);
      if (!(v > prev_v)) throw std::invalid_argument("ComparisonFunction: not strictly increasing on sample grid");
      prev_s = s;
      prev_v = v;
    }
    (void)prev_s;
    if (cls == Class::KInf && !(fn(1e9) > 1e2))
      throw std::invalid_argument("ComparisonFunction: K-infinity probe failed");
    return {std::move(fn), cls, std::move(inverse), std::move(derivative)};
  }

  static ComparisonFunction identity() {
    return {[](double s) { return s; }, Class::KInf, [](double y) { return y; }, [](double) { return 1.0; }};
  }

  /// c * s with c > 0.
  static ComparisonFunction linear(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("ComparisonFunction::linear: slope must be positive");
    return {[c](double s) { return c * s; }, Class::KInf, [c](double y) { return y / c; },
            [c](double) { return c; }};
  }

  /// c * s^p with c > 0, p > 0.
  static ComparisonFunction power(double c, double p) {
    if (!(c > 0.0) || !(p > 0.0)) throw std::invalid_argument("ComparisonFunction::power: bad parameters");
    return {[c, p](double s) { return c * std::pow(s, p); }, Class::KInf,
            [c, p](double y) { return std::pow(y / c, 1.0 / p); },
            [c, p](double s) { return c * p * std::pow(s, p - 1.0); }};
  }
};

/// Inverse evaluation: uses the supplied inverse when present, otherwise
/// brackets by doubling and bisects (valid for strictly increasing f).
inline double invert(const ComparisonFunction& g, double y) {
  if (y < 0.0) throw std::invalid_argument("invert: negative value");
  if (g.inverse) return g.inverse(y);
  if (y == 0.0) return 0.0;
  double hi = 1.0;
  int guard = 0;
  while (g(hi) < y) {
    hi *= 2.0;
    if (++guard > 2000) throw std::runtime_error("invert: no upper bracket");
  }
  double lo = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace dwell
