#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "dwell/matrix.hpp"

namespace dwell {

/// Right-hand side of one subsystem: y = f(x), with |y| = |x| = n.
using VectorField = std::function<std::vector<double>(std::span<const double>)>;

/// A finite family of vector fields sharing dimension and equilibrium at
/// the origin, selected by a switching signal.
struct SwitchedSystem {
  enum class Kind { linear, nonlinear };

  Kind kind = Kind::linear;
  int dimension = 0;
  int mode_count = 0;
  std::vector<Matrix> matrices;      // linear case, one per mode
  std::vector<VectorField> fields;   // nonlinear case, one per mode

  static SwitchedSystem linear(std::vector<Matrix> a) {
    if (a.empty()) throw std::invalid_argument("SwitchedSystem: need at least one mode");
    const int n = a.front().rows();
    for (const auto& m : a) {
      if (!m.square() || m.rows() != n) throw std::invalid_argument("SwitchedSystem: modes must share dimension");
      if (!m.all_finite()) throw std::invalid_argument("SwitchedSystem: non-finite entries");
    }
    SwitchedSystem s;
    s.kind = Kind::linear;
    s.dimension = n;
    s.mode_count = static_cast<int>(a.size());
    s.matrices = std::move(a);
    return s;
  }

  static SwitchedSystem nonlinear(int dimension, std::vector<VectorField> f) {
    if (dimension < 1 || f.empty()) throw std::invalid_argument("SwitchedSystem: bad nonlinear description");
    SwitchedSystem s;
    s.kind = Kind::nonlinear;
    s.dimension = dimension;
    s.mode_count = static_cast<int>(f.size());
    s.fields = std::move(f);
    // The origin must be an equilibrium of every mode.
    const std::vector<double> zero(static_cast<std::size_t>(dimension), 0.0);
    for (int i = 0; i < s.mode_count; ++i) {
      const std::vector<double> y = s.fields[static_cast<std::size_t>(i)](zero);
      if (static_cast<int>(y.size()) != dimension)
        throw std::invalid_argument("SwitchedSystem: vector field dimension mismatch");
      for (double v : y)
        if (std::abs(v) > 1e-12)
          throw std::invalid_argument("SwitchedSystem: mode " + std::to_string(i + 1) +
                                      " does not vanish at the origin");
    }
    return s;
  }

  /// Evaluates mode i (1-based) at x. Works for both kinds.
  std::vector<double> rhs(int mode, std::span<const double> x) const {
    if (kind == Kind::linear) return matrices[static_cast<std::size_t>(mode - 1)] * x;
    return fields[static_cast<std::size_t>(mode - 1)](x);
  }
};

}  // namespace dwell
