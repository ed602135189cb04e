#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "dwell/certify.hpp"
#include "dwell/comparison.hpp"
#include "dwell/linalg.hpp"
#include "dwell/quadrature.hpp"
#include "dwell/system.hpp"

namespace dwell {

struct TauStarReport {
  double epsilon = 0.0;
  std::vector<std::pair<double, double>> grid;  // (s, integral)
  bool unbounded = false;
  double tau_star = 0.0;
  double attained_s = std::numeric_limits<double>::quiet_NaN();
};

/// Small-gain bound tau* = sup over s of int_s^{chi(s)} dr / Psi_eps(r).
/// Integrals run in the log domain (r = e^u), the supremum over a log grid
/// of candidate s with golden-section refinement around the best cell.
/// When the integral keeps growing toward both ends of the s-range the
/// report says Unbounded instead of quoting a number.
inline TauStarReport tau_star(const ComparisonFunction& rho_fn, const ComparisonFunction& chi, double epsilon,
                              std::pair<double, double> s_range = {1e-2, 1e2}, int grid_size = 64) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("tau_star: epsilon must be positive");
  if (!(s_range.first > 0.0) || !(s_range.second > s_range.first))
    throw std::invalid_argument("tau_star: need 0 < s_min < s_max");
  if (grid_size < 8) throw std::invalid_argument("tau_star: grid too small");

  auto integral_at = [&](double s) {
    const double upper = chi(s);
    if (upper == s) return 0.0;
    return detail::integral_inv_psi(rho_fn, epsilon, 0.0, s, upper);
  };

  TauStarReport report;
  report.epsilon = epsilon;
  report.grid.reserve(static_cast<std::size_t>(grid_size));
  const double lr = std::log(s_range.second / s_range.first);
  for (int k = 0; k < grid_size; ++k) {
    const double s = s_range.first * std::exp(lr * static_cast<double>(k) / static_cast<double>(grid_size - 1));
    report.grid.emplace_back(s, integral_at(s));
  }

  // Divergence heuristic: an endpoint whose values rise monotonically all
  // the way to the boundary and dominate the rest of the grid tenfold
  // marks the supremum as escaping through that end. Either end suffices
  // (the sup runs over all s > 0), so a truncated number is never quoted
  // for a visibly escaping integral.
  const int min_run = 5;
  if (grid_size > 4 * min_run) {
    auto value = [&](int k) { return report.grid[static_cast<std::size_t>(k)].second; };
    int left_run = 0;
    while (left_run + 1 < grid_size && value(left_run) > value(left_run + 1)) ++left_run;
    int right_run = 0;
    while (right_run + 1 < grid_size && value(grid_size - 1 - right_run) > value(grid_size - 2 - right_run))
      ++right_run;
    auto max_outside = [&](int lo, int hi) {  // max over [lo, hi)
      double m = -std::numeric_limits<double>::infinity();
      for (int k = lo; k < hi; ++k) m = std::max(m, value(k));
      return m;
    };
    bool diverges = false;
    if (left_run >= min_run) {
      const double rest = std::max(max_outside(left_run, grid_size), 1e-12);
      if (value(0) > 10.0 * rest) diverges = true;
    }
    if (right_run >= min_run) {
      const double rest = std::max(max_outside(0, grid_size - right_run), 1e-12);
      if (value(grid_size - 1) > 10.0 * rest) diverges = true;
    }
    if (diverges) {
      report.unbounded = true;
      report.tau_star = std::numeric_limits<double>::infinity();
      return report;
    }
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < report.grid.size(); ++k)
    if (report.grid[k].second > report.grid[best].second) best = k;
  report.tau_star = report.grid[best].second;
  report.attained_s = report.grid[best].first;

  const double lo = report.grid[best == 0 ? 0 : best - 1].first;
  const double hi = report.grid[std::min(best + 1, report.grid.size() - 1)].first;
  if (hi > lo) {
    const double s_ref = std::exp(golden_section_min(
        [&](double ls) { return -integral_at(std::exp(ls)); }, std::log(lo), std::log(hi), 70));
    const double v_ref = integral_at(s_ref);
    if (v_ref > report.tau_star) {
      report.tau_star = v_ref;
      report.attained_s = s_ref;
    }
  }
  return report;
}

struct AdtBoundReport {
  double rho = 0.0;
  struct Row {
    double alpha, nu, tau;
  };
  std::vector<Row> curve;
  double alpha_star = 0.0;
  double nu_star = 1.0;
  double tau_quad = 0.0;
  QuadraticCertificate certificate;
};

/// Quadratic-relaxation upper bound on the minimal average dwell-time:
/// P_i(alpha) solves the unit-right-hand-side Lyapunov equation for
/// A_i + (alpha + rho) I, nu(alpha) is the worst pairwise Loewner gain,
/// and tau(alpha) = ln(nu)/alpha is minimized over a log grid with
/// golden-section refinement. The emitted certificate is re-verified.
inline AdtBoundReport estimate_min_adt(const SwitchedSystem& sys, double rho,
                                       std::pair<double, double> alpha_range = {1e-3, 1e2}, int grid_size = 64,
                                       int jobs = 1) {
  if (sys.kind != SwitchedSystem::Kind::linear) throw std::invalid_argument("estimate_min_adt: system must be linear");
  if (!(rho > 0.0)) throw std::invalid_argument("estimate_min_adt: rho must be positive");
  if (grid_size < 4) throw std::invalid_argument("estimate_min_adt: grid too small");
  const int m = sys.mode_count;
  const int n = sys.dimension;

  double abscissa = -std::numeric_limits<double>::infinity();
  for (const auto& a : sys.matrices) abscissa = std::max(abscissa, spectral_abscissa(a));
  if (!(rho < -abscissa))
    throw std::invalid_argument("estimate_min_adt: rho must lie below the spectral abscissa margin " +
                                std::to_string(-abscissa));

  // The shifted matrices must stay Hurwitz with a workable margin:
  // alpha + rho < |abscissa|, backed off so the Lyapunov solves stay
  // well-conditioned right at the cap.
  const double alpha_cap = (-abscissa - rho) * (1.0 - 1e-6);
  const double lo = std::max(alpha_range.first, 1e-12);
  const double hi = std::min(alpha_range.second, alpha_cap);
  if (!(hi > lo)) throw std::invalid_argument("estimate_min_adt: empty feasible alpha range");

  const Matrix id = Matrix::identity(n);
  const SpdMatrix unit(id);
  auto family_at = [&](double alpha) {
    std::vector<SpdMatrix> P;
    P.reserve(static_cast<std::size_t>(m));
    for (const auto& a : sys.matrices) P.push_back(lyap_solve(a + (alpha + rho) * id, unit));
    return P;
  };
  auto nu_at = [&](const std::vector<SpdMatrix>& P) {
    double nu2 = 1.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        nu2 = std::max(nu2, gen_eig_max(P[static_cast<std::size_t>(i)], P[static_cast<std::size_t>(j)]));
      }
    return std::sqrt(nu2);
  };
  auto tau_at = [&](double alpha) {
    const double nu = nu_at(family_at(alpha));
    return std::log(nu) / alpha;
  };

  AdtBoundReport report;
  report.rho = rho;
  report.curve.resize(static_cast<std::size_t>(grid_size));
  const double lr = std::log(hi / lo);
  auto fill = [&](int from, int to) {
    for (int k = from; k < to; ++k) {
      const double alpha = lo * std::exp(lr * static_cast<double>(k) / static_cast<double>(grid_size - 1));
      const double nu = nu_at(family_at(alpha));
      report.curve[static_cast<std::size_t>(k)] = {alpha, nu, std::log(nu) / alpha};
    }
  };
  if (jobs <= 1) {
    fill(0, grid_size);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (grid_size + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
      const int from = w * chunk, to = std::min(grid_size, (w + 1) * chunk);
      if (from < to) pool.emplace_back(fill, from, to);
    }
    for (auto& th : pool) th.join();
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < report.curve.size(); ++k)
    if (report.curve[k].tau < report.curve[best].tau) best = k;

  // tau(alpha) need not be unimodal; refine only around the grid minimum.
  const double a_lo = report.curve[best == 0 ? 0 : best - 1].alpha;
  const double a_hi = report.curve[std::min(best + 1, report.curve.size() - 1)].alpha;
  double alpha_star = report.curve[best].alpha;
  if (a_hi > a_lo)
    alpha_star = std::exp(golden_section_min([&](double la) { return tau_at(std::exp(la)); }, std::log(a_lo),
                                             std::log(a_hi), 70));
  if (tau_at(alpha_star) > report.curve[best].tau) alpha_star = report.curve[best].alpha;

  std::vector<SpdMatrix> P = family_at(alpha_star);
  const double nu_star = nu_at(P);
  const double tau_star_quad = std::log(nu_star) / alpha_star;
  report.alpha_star = alpha_star;
  report.nu_star = nu_star;
  report.tau_quad = tau_star_quad;
  // A zero bound (identical shapes, nu = 1) still needs a positive tau to
  // be a well-formed certificate.
  const double cert_tau = tau_star_quad > 0.0 ? tau_star_quad : 1.0;
  report.certificate = QuadraticCertificate::checked(std::move(P), rho, alpha_star, nu_star, cert_tau);
  const CheckResult verdict = check_adt_quadratic(sys, report.certificate);
  if (!verdict.certified)
    throw std::runtime_error("estimate_min_adt: emitted certificate failed re-verification (condition " +
                             verdict.condition + ")");
  return report;
}

struct ConverseNormParams {
  double rho = 0.0;
  double alpha = 0.0;
  double tau = 0.0;
  int branch_depth = 4;
  int time_grid = 8;
  double envelope_overshoot = 1.0;  // certified M standing in for eta_2
  long node_budget = 1000000;
};

/// Lower approximation of the converse Lyapunov norm
///   v_i(x) = sup over signals starting in mode i, sup over s >= 0 of
///            e^{(rho+alpha)s} e^{-alpha tau N(0,s)} |Phi(s, x)|
/// by enumerating switching patterns on a uniform time grid up to the
/// truncation horizon T1 = (1 + alpha tau + ln M) / (rho + alpha).
/// Enumeration only ever under-approximates the supremum.
inline double empirical_converse_norm(const SwitchedSystem& sys, int mode, std::span<const double> x,
                                      const ConverseNormParams& params) {
  if (sys.kind != SwitchedSystem::Kind::linear)
    throw std::invalid_argument("empirical_converse_norm: system must be linear");
  if (mode < 1 || mode > sys.mode_count) throw std::invalid_argument("empirical_converse_norm: bad mode");
  if (static_cast<int>(x.size()) != sys.dimension)
    throw std::invalid_argument("empirical_converse_norm: dimension mismatch");
  if (params.branch_depth < 0 || params.branch_depth > 8)
    throw std::invalid_argument("empirical_converse_norm: branch depth must be in [0, 8]");
  if (params.time_grid < 1) throw std::invalid_argument("empirical_converse_norm: time grid must be positive");
  if (!(params.rho + params.alpha > 0.0))
    throw std::invalid_argument("empirical_converse_norm: rho + alpha must be positive");

  const double x0n = norm2(x);
  if (x0n == 0.0) return 0.0;

  const double m_env = std::max(params.envelope_overshoot, 1.0);
  const double horizon =
      (1.0 + params.alpha * params.tau + std::log(m_env)) / (params.rho + params.alpha);
  const double dt = horizon / static_cast<double>(params.time_grid);
  std::vector<Matrix> prop;
  prop.reserve(static_cast<std::size_t>(sys.mode_count));
  for (const auto& a : sys.matrices) prop.push_back(expm(a, dt));

  double best = 0.0;
  long nodes = 0;
  const double divergence_cap = 1e6 * x0n;

  // DFS over per-interval mode assignments with at most branch_depth
  // changes; switches_before counts discontinuities strictly before the
  // current node time (plus the t0 = 0 convention for s > 0).
  auto evaluate = [&](int k, long switches_before, std::span<const double> state) {
    const double s = dt * static_cast<double>(k);
    const double n_count = (k == 0) ? 0.0 : static_cast<double>(switches_before + 1);
    const double value = std::exp((params.rho + params.alpha) * s) *
                         std::exp(-params.alpha * params.tau * n_count) * norm2(state);
    best = std::max(best, value);
  };

  struct Frame {
    int k;
    int current_mode;  // 1-based
    int switches;
    std::vector<double> state;
  };
  std::vector<Frame> stack;
  stack.push_back({0, mode, 0, std::vector<double>(x.begin(), x.end())});
  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();
    if (++nodes > params.node_budget) break;
    evaluate(fr.k, fr.switches, fr.state);
    if (best > divergence_cap)
      throw std::runtime_error("empirical_converse_norm: divergence detected, certificate premise fails");
    if (fr.k == params.time_grid) continue;
    // Continue in the same mode.
    {
      std::vector<double> next = prop[static_cast<std::size_t>(fr.current_mode - 1)] * fr.state;
      stack.push_back({fr.k + 1, fr.current_mode, fr.switches, std::move(next)});
    }
    // Switch at this grid point (k >= 1 keeps sigma(0) = mode).
    if (fr.k >= 1 && fr.switches < params.branch_depth) {
      for (int m2 = 1; m2 <= sys.mode_count; ++m2) {
        if (m2 == fr.current_mode) continue;
        std::vector<double> next = prop[static_cast<std::size_t>(m2 - 1)] * fr.state;
        stack.push_back({fr.k + 1, m2, fr.switches + 1, std::move(next)});
      }
    }
  }
  return best;
}

}  // namespace dwell
