#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dwell/comparison.hpp"
#include "dwell/linalg.hpp"
#include "dwell/quadrature.hpp"
#include "dwell/system.hpp"

namespace dwell {

struct CertifyOptions {
  double margin = 1e-9;      // strictness margin on condition eigenvalues
  double search_delta = 1e-4;  // projection target margin during search
  double search_floor = 1.0;   // eigenvalue box kept during search
  double search_cap = 100.0;
};

/// Multiple quadratic Lyapunov norms v_i(x) = sqrt(x^T P_i x) for a
/// dwell-time certificate: flow decay at rate rho plus the tau-separated
/// jump contraction.
struct DwellCertificate {
  std::vector<SpdMatrix> P;
  double rho = 0.0;
  double tau = 0.0;
};

/// Flow-free certificate: per-mode decay at rate alpha + rho and the
/// Loewner coupling P_i <= nu^2 P_j, valid for tau >= ln(nu)/alpha.
struct QuadraticCertificate {
  std::vector<SpdMatrix> P;
  double rho = 0.0;
  double alpha = 0.0;
  double nu = 1.0;
  double tau = 0.0;

  static QuadraticCertificate checked(std::vector<SpdMatrix> P, double rho, double alpha, double nu, double tau) {
    if (P.empty()) throw std::invalid_argument("QuadraticCertificate: empty family");
    if (!(rho > 0.0)) throw std::invalid_argument("QuadraticCertificate: rho must be positive");
    if (alpha < 0.0) throw std::invalid_argument("QuadraticCertificate: alpha must be nonnegative");
    if (!(nu >= 1.0)) throw std::invalid_argument("QuadraticCertificate: nu must be >= 1");
    if (!(tau > 0.0)) throw std::invalid_argument("QuadraticCertificate: tau must be positive");
    if (alpha == 0.0 && nu != 1.0)
      throw std::invalid_argument("QuadraticCertificate: alpha = 0 requires nu = 1 (common Lyapunov case)");
    return {std::move(P), rho, alpha, nu, tau};
  }

  /// Overshoot of the induced trajectory envelope: sqrt of the eigenvalue
  /// spread across the family.
  double envelope_overshoot() const {
    double lmax = 0.0, lmin = std::numeric_limits<double>::infinity();
    for (const auto& p : P) {
      auto eig = symmetric_eigs(p.matrix());
      lmax = std::max(lmax, eig.front());
      lmin = std::min(lmin, eig.back());
    }
    return std::sqrt(lmax / lmin);
  }
};

struct CheckResult {
  bool certified = true;
  std::string condition;  // "flow", "jump", or "tau" when failed
  int i = 0, j = 0;       // offending mode pair, 1-based
  double margin = 0.0;    // offending lambda_max (or tau deficit)

  static CheckResult ok() { return {}; }
  static CheckResult failed(std::string cond, int i, int j, double m) { return {false, std::move(cond), i, j, m}; }
};

namespace detail {

inline void require_linear(const SwitchedSystem& sys) {
  if (sys.kind != SwitchedSystem::Kind::linear) throw std::invalid_argument("certify: system must be linear");
}

inline void require_family(const SwitchedSystem& sys, const std::vector<SpdMatrix>& P) {
  if (static_cast<int>(P.size()) != sys.mode_count)
    throw std::invalid_argument("certify: one matrix per mode required");
  for (const auto& p : P)
    if (p.dim() != sys.dimension) throw std::invalid_argument("certify: dimension mismatch");
}

}  // namespace detail

/// Dwell-time conditions for quadratic norms: for every mode the flow of
/// v_i decays at rate rho, and flowing any mode i for tau lands every v_j
/// below e^{-rho tau} v_i. Strictness is decided by an eigenvalue margin.
inline CheckResult check_dwell_quadratic(const SwitchedSystem& sys, const std::vector<SpdMatrix>& P, double rho,
                                         double tau, const CertifyOptions& opts = {}) {
  detail::require_linear(sys);
  detail::require_family(sys, P);
  if (!(rho > 0.0) || !(tau > 0.0)) throw std::invalid_argument("check_dwell_quadratic: rho, tau must be positive");
  const int m = sys.mode_count;
  for (int i = 0; i < m; ++i) {
    const Matrix& a = sys.matrices[static_cast<std::size_t>(i)];
    const Matrix& p = P[static_cast<std::size_t>(i)].matrix();
    Matrix cond = (a.transposed() * p + p * a + 2.0 * rho * p).symmetrized();
    const double lmax = symmetric_eigs(cond).front();
    if (lmax >= -opts.margin) return CheckResult::failed("flow", i + 1, 0, lmax);
  }
  const double contraction = std::exp(-2.0 * rho * tau);
  for (int i = 0; i < m; ++i) {
    const Matrix e = expm(sys.matrices[static_cast<std::size_t>(i)], tau);
    for (int j = 0; j < m; ++j) {
      Matrix cond = (e.transposed() * P[static_cast<std::size_t>(j)].matrix() * e -
                     contraction * P[static_cast<std::size_t>(i)].matrix())
                        .symmetrized();
      const double lmax = symmetric_eigs(cond).front();
      if (lmax >= -opts.margin) return CheckResult::failed("jump", i + 1, j + 1, lmax);
    }
  }
  return CheckResult::ok();
}

/// Feasibility search for dwell-time quadratic certificates by alternating
/// halfspace projections: every violated eigendirection of a flow or jump
/// condition is a scalar linear constraint on (P_i, P_j) with a cheap exact
/// projection, and eigenvalue clipping keeps the family in the
/// [floor, cap] box. NotFound after the budget is not an infeasibility
/// proof; any returned certificate was re-verified independently.
inline std::optional<DwellCertificate> search_dwell_quadratic(const SwitchedSystem& sys, double rho, double tau,
                                                              int budget = 500, const CertifyOptions& opts = {}) {
  detail::require_linear(sys);
  if (!(rho > 0.0) || !(tau > 0.0)) throw std::invalid_argument("search_dwell_quadratic: rho, tau must be positive");
  const int m = sys.mode_count;
  const int n = sys.dimension;
  for (const auto& a : sys.matrices) {
    if (!(spectral_abscissa(a) < -rho))
      throw std::invalid_argument("search_dwell_quadratic: every mode must be Hurwitz with abscissa below -rho");
  }

  std::vector<Matrix> E;
  E.reserve(static_cast<std::size_t>(m));
  for (const auto& a : sys.matrices) E.push_back(expm(a, tau));
  const double contraction = std::exp(-2.0 * rho * tau);
  const double delta = opts.search_delta;

  // Seed with the shifted Lyapunov shapes, normalized to lambda_min = 1.
  std::vector<Matrix> P;
  for (const auto& a : sys.matrices) {
    Matrix seed = lyap_solve(a + rho * Matrix::identity(n), SpdMatrix(Matrix::identity(n))).matrix();
    P.push_back(seed * (1.0 / symmetric_eigs(seed).back()));
  }

  auto verify = [&]() -> std::optional<DwellCertificate> {
    std::vector<SpdMatrix> fam;
    fam.reserve(P.size());
    double lmin = std::numeric_limits<double>::infinity();
    for (const auto& p : P) {
      try {
        fam.emplace_back(p);
      } catch (const std::domain_error&) {
        return std::nullopt;
      }
      lmin = std::min(lmin, symmetric_eigs(p).back());
    }
    if (!(lmin > 0.0)) return std::nullopt;
    // Scale so the identity is a lower bound across the family.
    std::vector<SpdMatrix> scaled;
    scaled.reserve(fam.size());
    for (const auto& p : fam) scaled.emplace_back(p.matrix() * (1.0 / lmin));
    if (!check_dwell_quadratic(sys, scaled, rho, tau, opts).certified) return std::nullopt;
    return DwellCertificate{std::move(scaled), rho, tau};
  };

  for (int it = 0; it < budget; ++it) {
    // Flow constraints: w^T (A^T P + P A + 2 rho P) w <= -delta.
    for (int i = 0; i < m; ++i) {
      const Matrix& a = sys.matrices[static_cast<std::size_t>(i)];
      Matrix& p = P[static_cast<std::size_t>(i)];
      Matrix cond = (a.transposed() * p + p * a + 2.0 * rho * p).symmetrized();
      auto [lam, vec] = symmetric_eig_decomp(cond);
      for (int k = 0; k < n; ++k) {
        if (lam[static_cast<std::size_t>(k)] <= -delta) continue;
        std::vector<double> w(static_cast<std::size_t>(n));
        for (int r = 0; r < n; ++r) w[static_cast<std::size_t>(r)] = vec(r, k);
        const std::vector<double> aw = a * w;
        Matrix g(n, n);
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c)
            g(r, c) = aw[static_cast<std::size_t>(r)] * w[static_cast<std::size_t>(c)] +
                      w[static_cast<std::size_t>(r)] * aw[static_cast<std::size_t>(c)] +
                      2.0 * rho * w[static_cast<std::size_t>(r)] * w[static_cast<std::size_t>(c)];
        double gnorm2 = 0.0;
        for (double v : g.data()) gnorm2 += v * v;
        const double step = (lam[static_cast<std::size_t>(k)] + delta) / gnorm2;
        p -= step * g;
      }
    }
    // Jump constraints: <P_j, u u^T> - c <P_i, w w^T> <= -delta with
    // u = e^{A_i tau} w, projected in the joint (P_i, P_j) metric.
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        Matrix cond = (E[static_cast<std::size_t>(i)].transposed() * P[static_cast<std::size_t>(j)] *
                           E[static_cast<std::size_t>(i)] -
                       contraction * P[static_cast<std::size_t>(i)])
                          .symmetrized();
        auto [lam, vec] = symmetric_eig_decomp(cond);
        for (int k = 0; k < n; ++k) {
          if (lam[static_cast<std::size_t>(k)] <= -delta) continue;
          std::vector<double> w(static_cast<std::size_t>(n));
          for (int r = 0; r < n; ++r) w[static_cast<std::size_t>(r)] = vec(r, k);
          const std::vector<double> u = E[static_cast<std::size_t>(i)] * w;
          double u4 = 0.0;
          for (double v : u) u4 += v * v;
          u4 = u4 * u4;
          const double gnorm2 = u4 + contraction * contraction;  // |uu^T|_F^2 + c^2 |ww^T|_F^2 for unit w
          const double step = (lam[static_cast<std::size_t>(k)] + delta) / gnorm2;
          Matrix& pj = P[static_cast<std::size_t>(j)];
          Matrix& pi = P[static_cast<std::size_t>(i)];
          for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
              pj(r, c) -= step * u[static_cast<std::size_t>(r)] * u[static_cast<std::size_t>(c)];
              pi(r, c) += step * contraction * w[static_cast<std::size_t>(r)] * w[static_cast<std::size_t>(c)];
            }
        }
      }
    }
    // Box projection: clip eigenvalues to [floor, cap].
    for (int i = 0; i < m; ++i) {
      auto [lam, vec] = symmetric_eig_decomp(P[static_cast<std::size_t>(i)]);
      bool clipped = false;
      for (double& l : lam) {
        const double c = std::clamp(l, opts.search_floor, opts.search_cap);
        if (c != l) {
          l = c;
          clipped = true;
        }
      }
      if (clipped) {
        Matrix rebuilt(n, n);
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += vec(r, k) * lam[static_cast<std::size_t>(k)] * vec(c, k);
            rebuilt(r, c) = s;
          }
        P[static_cast<std::size_t>(i)] = rebuilt.symmetrized();
      }
    }
    if (auto cert = verify()) return cert;
  }
  return std::nullopt;
}

/// Flow-free average-dwell-time conditions: per-mode decay at rate
/// alpha + rho, Loewner coupling P_i <= nu^2 P_j for every ordered pair,
/// and the dwell coupling tau >= ln(nu)/alpha (vacuous in the common
/// Lyapunov case alpha = 0, nu = 1).
inline CheckResult check_adt_quadratic(const SwitchedSystem& sys, const QuadraticCertificate& cert,
                                       const CertifyOptions& opts = {}) {
  detail::require_linear(sys);
  detail::require_family(sys, cert.P);
  if (!(cert.rho > 0.0) || cert.alpha < 0.0 || !(cert.nu >= 1.0) || !(cert.tau > 0.0))
    throw std::invalid_argument("check_adt_quadratic: malformed certificate");
  if (cert.alpha == 0.0 && cert.nu != 1.0)
    throw std::invalid_argument("check_adt_quadratic: alpha = 0 requires nu = 1");
  const int m = sys.mode_count;
  const double rate = cert.alpha + cert.rho;
  for (int i = 0; i < m; ++i) {
    const Matrix& a = sys.matrices[static_cast<std::size_t>(i)];
    const Matrix& p = cert.P[static_cast<std::size_t>(i)].matrix();
    Matrix cond = (a.transposed() * p + p * a + 2.0 * rate * p).symmetrized();
    const double lmax = symmetric_eigs(cond).front();
    if (lmax >= -opts.margin) return CheckResult::failed("flow", i + 1, 0, lmax);
  }
  const double nu2 = cert.nu * cert.nu;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const double g = gen_eig_max(cert.P[static_cast<std::size_t>(i)], cert.P[static_cast<std::size_t>(j)]);
      if (g > nu2 + opts.margin) return CheckResult::failed("jump", i + 1, j + 1, g - nu2);
    }
  }
  if (cert.alpha > 0.0) {
    const double required = std::log(cert.nu) / cert.alpha;
    if (cert.tau < required * (1.0 - 1e-12) - 1e-15)
      return CheckResult::failed("tau", 0, 0, required - cert.tau);
  }
  return CheckResult::ok();
}

/// Psi_eps(t) = min over s in [0, t] of rho(s) + eps (t - s): grid scan
/// plus golden-section refinement around the best cell; the result never
/// exceeds the endpoint values rho(t) and eps t.
inline double psi_eps(const ComparisonFunction& rho_fn, double epsilon, double t) {
  if (t < 0.0) throw std::invalid_argument("psi_eps: t must be nonnegative");
  if (epsilon < 0.0) throw std::invalid_argument("psi_eps: epsilon must be nonnegative");
  if (t == 0.0) return 0.0;
  auto objective = [&](double s) { return rho_fn(s) + epsilon * (t - s); };
  const int grid = 24;
  double best_s = 0.0, best_v = objective(0.0);
  for (int k = 1; k <= grid; ++k) {
    const double s = t * static_cast<double>(k) / static_cast<double>(grid);
    const double v = objective(s);
    if (v < best_v) {
      best_v = v;
      best_s = s;
    }
  }
  const double cell = t / static_cast<double>(grid);
  const double lo = std::max(0.0, best_s - cell), hi = std::min(t, best_s + cell);
  const double refined = golden_section_min(objective, lo, hi, 48, 1e-13 * t);
  return std::min({objective(refined), best_v, rho_fn(t), epsilon * t});
}

namespace detail {

/// Integral of (1 + alpha) / Psi_eps(r) over [a, b] using the substitution
/// r = e^u, which keeps the integrand bounded when Psi grows linearly near
/// the origin.
inline double integral_inv_psi(const ComparisonFunction& rho_fn, double epsilon, double alpha, double a, double b,
                               double atol = 1e-12, double rtol = 1e-10) {
  if (a == b) return 0.0;
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("integral_inv_psi: bounds must be positive");
  auto integrand = [&](double u) {
    const double r = std::exp(u);
    return (1.0 + alpha) * r / psi_eps(rho_fn, epsilon, r);
  };
  return adaptive_simpson(integrand, std::log(a), std::log(b), atol, rtol);
}

}  // namespace detail

/// The K-infinity warp gamma(s) = exp(int_1^s (1 + alpha)/Psi_eps) that
/// turns a class-K decrease rate into the linear rate 1 + alpha;
/// gamma(0) = 0 by construction and gamma(1) = 1 (empty integral).
inline ComparisonFunction gamma_transform(const ComparisonFunction& rho_fn, double epsilon, double alpha,
                                          double tau) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("gamma_transform: epsilon must be positive");
  if (alpha < 0.0) throw std::invalid_argument("gamma_transform: alpha must be nonnegative");
  if (!(tau > 0.0)) throw std::invalid_argument("gamma_transform: tau must be positive");
  auto value = [rho_fn, epsilon, alpha](double s) -> double {
    if (s <= 0.0) return 0.0;
    return std::exp(detail::integral_inv_psi(rho_fn, epsilon, alpha, 1.0, s));
  };
  auto deriv = [rho_fn, epsilon, alpha, value](double s) -> double {
    if (s <= 0.0) return 0.0;
    return (1.0 + alpha) / psi_eps(rho_fn, epsilon, s) * value(s);
  };
  ComparisonFunction g;
  g.f = value;
  g.cls = ComparisonFunction::Class::KInf;
  g.derivative = deriv;
  ComparisonFunction g_for_inv = g;
  g.inverse = [g_for_inv](double y) { return invert(ComparisonFunction{g_for_inv.f, g_for_inv.cls, nullptr, nullptr}, y); };
  return g;
}

/// Nonlinear multiple-Lyapunov data: per-mode scalar functions with the
/// K-infinity sandwich, a class-K decrease rate, and the K-infinity jump
/// gain chi.
struct NonlinearCertificate {
  std::vector<std::function<double(std::span<const double>)>> V;
  std::vector<std::function<std::vector<double>(std::span<const double>)>> gradV;  // optional, may be empty
  ComparisonFunction alpha1;
  ComparisonFunction alpha2;
  ComparisonFunction rho_fn;
  ComparisonFunction chi;
  double epsilon = 1.0;
};

struct SampledCheckResult {
  bool consistent = true;
  std::vector<double> point;
  std::string condition;  // "sandwich", "flow", or "jump"
  int i = 0, j = 0;
};

/// Deterministic spherical sample grid: log-spaced radii times fixed
/// directions (uniform angles in 2D, splitmix-seeded gaussian directions
/// otherwise).
inline std::vector<std::vector<double>> spherical_samples(int dimension, double r_lo = 1e-2, double r_hi = 1e2,
                                                          int radii = 16, int directions = 0) {
  if (dimension < 1) throw std::invalid_argument("spherical_samples: bad dimension");
  if (directions == 0) directions = dimension <= 2 ? 64 : 200;
  std::vector<std::vector<double>> dirs;
  if (dimension == 1) {
    dirs.push_back({1.0});
    dirs.push_back({-1.0});
  } else if (dimension == 2) {
    for (int k = 0; k < directions; ++k) {
      const double th = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(directions);
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  } else {
    std::uint64_t state = 0x5deece66dull;
    auto next_uniform = [&state]() {
      std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      return static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
    };
    for (int k = 0; k < directions; ++k) {
      std::vector<double> d(static_cast<std::size_t>(dimension));
      double nrm = 0.0;
      for (auto& v : d) {
        const double u1 = std::max(next_uniform(), 1e-12), u2 = next_uniform();
        v = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        nrm += v * v;
      }
      nrm = std::sqrt(nrm);
      for (auto& v : d) v /= nrm;
      dirs.push_back(std::move(d));
    }
  }
  std::vector<std::vector<double>> out;
  for (int r = 0; r < radii; ++r) {
    const double radius = r_lo * std::pow(r_hi / r_lo, static_cast<double>(r) / static_cast<double>(radii - 1));
    for (const auto& d : dirs) {
      std::vector<double> x(d.size());
      for (std::size_t k = 0; k < d.size(); ++k) x[k] = radius * d[k];
      out.push_back(std::move(x));
    }
  }
  return out;
}

/// Sampled verification of the nonlinear conditions: the sandwich, the
/// flow decrease through a Dini quotient (or the gradient form when
/// available), and the pairwise jump bound. A pass is only a consistency
/// statement about the sample set, never a certificate.
inline SampledCheckResult check_nonlinear_sampled(const SwitchedSystem& sys, const NonlinearCertificate& cert,
                                                  const std::vector<std::vector<double>>& samples, double h = 1e-4,
                                                  double flow_slack_rel = 1e-3) {
  if (static_cast<int>(cert.V.size()) != sys.mode_count)
    throw std::invalid_argument("check_nonlinear_sampled: one function per mode required");
  if (!(h > 0.0)) throw std::invalid_argument("check_nonlinear_sampled: h must be positive");
  const bool have_grad = !cert.gradV.empty();
  std::vector<Matrix> prop;
  if (!have_grad && sys.kind == SwitchedSystem::Kind::linear)
    for (const auto& a : sys.matrices) prop.push_back(expm(a, h));

  for (const auto& x : samples) {
    const double xn = norm2(x);
    if (xn < 1e-12) continue;
    std::vector<double> vals(static_cast<std::size_t>(sys.mode_count));
    for (int i = 0; i < sys.mode_count; ++i) {
      const double v = cert.V[static_cast<std::size_t>(i)](x);
      vals[static_cast<std::size_t>(i)] = v;
      const double lo = cert.alpha1(xn), hi = cert.alpha2(xn);
      if (v < lo * (1.0 - 1e-9) - 1e-12 || v > hi * (1.0 + 1e-9) + 1e-12)
        return {false, x, "sandwich", i + 1, 0};

      const double budget = -cert.rho_fn(v);
      const double slack = flow_slack_rel * std::abs(budget) + 1e-12;
      double dini;
      if (have_grad) {
        const std::vector<double> g = cert.gradV[static_cast<std::size_t>(i)](x);
        const std::vector<double> f = sys.rhs(i + 1, x);
        dini = dot(g, f);
      } else {
        std::vector<double> y;
        if (sys.kind == SwitchedSystem::Kind::linear) {
          y = prop[static_cast<std::size_t>(i)] * x;
        } else {
          // One RK4 step of length h along mode i.
          const std::vector<double> k1 = sys.rhs(i + 1, x);
          std::vector<double> tmp(x.size());
          for (std::size_t r = 0; r < x.size(); ++r) tmp[r] = x[r] + 0.5 * h * k1[r];
          const std::vector<double> k2 = sys.rhs(i + 1, tmp);
          for (std::size_t r = 0; r < x.size(); ++r) tmp[r] = x[r] + 0.5 * h * k2[r];
          const std::vector<double> k3 = sys.rhs(i + 1, tmp);
          for (std::size_t r = 0; r < x.size(); ++r) tmp[r] = x[r] + h * k3[r];
          const std::vector<double> k4 = sys.rhs(i + 1, tmp);
          y.resize(x.size());
          for (std::size_t r = 0; r < x.size(); ++r)
            y[r] = x[r] + h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]);
        }
        dini = (cert.V[static_cast<std::size_t>(i)](y) - v) / h;
      }
      if (dini > budget + slack) return {false, x, "flow", i + 1, 0};
    }
    for (int i = 0; i < sys.mode_count; ++i) {
      for (int j = 0; j < sys.mode_count; ++j) {
        const double lhs = vals[static_cast<std::size_t>(i)];
        const double rhs = cert.chi(vals[static_cast<std::size_t>(j)]);
        if (lhs > rhs * (1.0 + 1e-9) + 1e-12) return {false, x, "jump", i + 1, j + 1};
      }
    }
  }
  return {};
}

/// Reads a quadratic ADT certificate as nonlinear data: V_i = x^T P_i x,
/// decrease rate 2(alpha + rho) s and jump gain nu^2 s.
inline NonlinearCertificate nonlinear_from_quadratic(const SwitchedSystem& sys, const QuadraticCertificate& cert) {
  detail::require_linear(sys);
  detail::require_family(sys, cert.P);
  NonlinearCertificate out;
  double lmax = 0.0, lmin = std::numeric_limits<double>::infinity();
  for (const auto& p : cert.P) {
    auto eig = symmetric_eigs(p.matrix());
    lmax = std::max(lmax, eig.front());
    lmin = std::min(lmin, eig.back());
  }
  for (const auto& p : cert.P) {
    out.V.push_back([p](std::span<const double> x) { return p.quad(x); });
    out.gradV.push_back([p](std::span<const double> x) {
      std::vector<double> g = p.matrix() * x;
      for (double& v : g) v *= 2.0;
      return g;
    });
  }
  out.alpha1 = ComparisonFunction::power(lmin, 2.0);
  out.alpha2 = ComparisonFunction::power(lmax, 2.0);
  out.rho_fn = ComparisonFunction::linear(2.0 * (cert.alpha + cert.rho));
  out.chi = cert.nu > 1.0 ? ComparisonFunction::linear(cert.nu * cert.nu) : ComparisonFunction::identity();
  out.epsilon = 2.0 * (cert.alpha + cert.rho);
  return out;
}

}  // namespace dwell
