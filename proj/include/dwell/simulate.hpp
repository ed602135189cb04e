#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dwell/linalg.hpp"
#include "dwell/signals.hpp"
#include "dwell/system.hpp"

namespace dwell {

/// Sampled solution of a switched system. Times include every switching
/// instant in [0, T]; the state is continuous across switches (only the
/// derivative jumps). blew_up marks a truncated run.
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<int> modes;  // active mode per sample
  SwitchingSignal signal;
  bool blew_up = false;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();

  double initial_norm() const { return norm2(states.front()); }
};

namespace detail {

constexpr double kBlowupNorm = 1e12;

/// Segment decomposition of [0, T] induced by the signal: consecutive
/// (start, end, mode) with end - start > 0.
struct Segment {
  double start, end;
  int mode;
};

inline std::vector<Segment> segments(const SwitchingSignal& sig, double T) {
  std::vector<Segment> out;
  if (T <= 0.0) return out;
  const auto d = sig.discontinuities_with_modes(T);
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double end = (k + 1 < d.size()) ? d[k + 1].t : T;
    if (end > d[k].t) out.push_back({d[k].t, end, d[k].mode});
  }
  return out;
}

inline bool state_ok(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return norm2(x) <= kBlowupNorm;
}

}  // namespace detail

/// Exact piecewise propagation of a switched linear system: within each
/// signal segment the state advances by matrix exponentials, so the error
/// is dominated by the expm tolerance. sample_dt > 0 adds interior samples
/// on a uniform grid; switching instants are always sampled.
inline Trajectory flow_linear(const SwitchedSystem& sys, const SwitchingSignal& sig, std::span<const double> x0,
                              double T, double sample_dt = 0.0) {
  if (sys.kind != SwitchedSystem::Kind::linear) throw std::invalid_argument("flow_linear: system is not linear");
  if (static_cast<int>(x0.size()) != sys.dimension) throw std::invalid_argument("flow_linear: state dimension mismatch");
  if (T < 0.0) throw std::invalid_argument("flow_linear: negative horizon");

  Trajectory traj;
  traj.signal = sig;
  std::vector<double> x(x0.begin(), x0.end());
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  traj.modes.push_back(sig.mode_at(0.0));
  if (T == 0.0) return traj;

  for (const auto& seg : detail::segments(sig, T)) {
    const Matrix& a = sys.matrices[static_cast<std::size_t>(seg.mode - 1)];
    const double len = seg.end - seg.start;
    long steps = 1;
    if (sample_dt > 0.0) steps = std::max<long>(1, static_cast<long>(std::ceil(len / sample_dt - 1e-12)));
    const double h = len / static_cast<double>(steps);
    const Matrix e = expm(a, h);
    for (long k = 1; k <= steps; ++k) {
      x = e * x;
      // Snap the final sample to the exact segment end.
      const double t = (k == steps) ? seg.end : seg.start + h * static_cast<double>(k);
      traj.times.push_back(t);
      traj.states.push_back(x);
      traj.modes.push_back(seg.mode);
      if (!detail::state_ok(x)) {
        traj.blew_up = true;
        traj.blowup_time = t;
        return traj;
      }
    }
  }
  return traj;
}

/// Classic fixed-step RK4 with the grid snapped so that every switching
/// instant is a grid point; the integrator never steps across a
/// discontinuity of the signal. Truncates with blew_up on non-finite or
/// oversized states.
inline Trajectory flow_nonlinear(const SwitchedSystem& sys, const SwitchingSignal& sig, std::span<const double> x0,
                                 double T, double step) {
  if (static_cast<int>(x0.size()) != sys.dimension)
    throw std::invalid_argument("flow_nonlinear: state dimension mismatch");
  if (!(step > 0.0)) throw std::invalid_argument("flow_nonlinear: step must be positive");
  if (T < 0.0) throw std::invalid_argument("flow_nonlinear: negative horizon");

  Trajectory traj;
  traj.signal = sig;
  std::vector<double> x(x0.begin(), x0.end());
  const std::size_t n = x.size();
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  traj.modes.push_back(sig.mode_at(0.0));
  if (T == 0.0) return traj;

  for (const auto& seg : detail::segments(sig, T)) {
    const double len = seg.end - seg.start;
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(len / step - 1e-12)));
    const double h = len / static_cast<double>(steps);
    for (long k = 1; k <= steps; ++k) {
      const std::vector<double> k1 = sys.rhs(seg.mode, x);
      std::vector<double> tmp(n);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
      const std::vector<double> k2 = sys.rhs(seg.mode, tmp);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
      const std::vector<double> k3 = sys.rhs(seg.mode, tmp);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
      const std::vector<double> k4 = sys.rhs(seg.mode, tmp);
      for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      const double t = (k == steps) ? seg.end : seg.start + h * static_cast<double>(k);
      traj.times.push_back(t);
      traj.states.push_back(x);
      traj.modes.push_back(seg.mode);
      if (!detail::state_ok(x)) {
        traj.blew_up = true;
        traj.blowup_time = t;
        return traj;
      }
    }
  }
  return traj;
}

/// Jump-dependent exponential envelope
///   |x(t)| <= M exp(alpha tau N(0,t)) exp(-(rho+alpha) t) |x0|.
struct DecayEnvelope {
  double M = 1.0;      // overshoot, >= 1
  double rho = 1.0;    // decay rate, > 0
  double alpha = 0.0;  // jump coupling, >= 0
  double tau = 1.0;    // dwell parameter, > 0

  static DecayEnvelope checked(double M, double rho, double alpha, double tau) {
    DecayEnvelope e{M, rho, alpha, tau};
    if (!(e.M >= 1.0)) throw std::invalid_argument("DecayEnvelope: M must be >= 1");
    if (!(e.rho > 0.0)) throw std::invalid_argument("DecayEnvelope: rho must be positive");
    if (e.alpha < 0.0) throw std::invalid_argument("DecayEnvelope: alpha must be nonnegative");
    if (!(e.tau > 0.0)) throw std::invalid_argument("DecayEnvelope: tau must be positive");
    return e;
  }

  double bound_at(double t, long switches, double x0_norm) const {
    return M * std::exp(alpha * tau * static_cast<double>(switches)) * std::exp(-(rho + alpha) * t) * x0_norm;
  }
};

struct EnvelopeVerdict {
  bool holds = true;
  double t = 0.0, lhs = 0.0, rhs = 0.0;  // first violation
};

/// Pointwise check of the envelope at every trajectory sample; the switch
/// count is taken on the trajectory's own signal. rel_tol absorbs the
/// integrator error at saturation.
inline EnvelopeVerdict check_envelope(const Trajectory& traj, const DecayEnvelope& env, double rel_tol = 1e-9) {
  if (traj.times.empty()) throw std::invalid_argument("check_envelope: empty trajectory");
  const double x0n = traj.initial_norm();
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    const double lhs = norm2(traj.states[k]);
    const double rhs = env.bound_at(t, count_switches(traj.signal, 0.0, t), x0n);
    if (lhs > rhs * (1.0 + rel_tol)) return {false, t, lhs, rhs};
  }
  return {};
}

struct EnvelopeFit {
  bool feasible = false;
  DecayEnvelope envelope;
};

/// Fits the smallest overshoot M and, among near-minimal-M rates, the
/// largest decay rho on a log grid with bisection refinement. Infeasible
/// when even the slowest rate needs M above the cap.
inline EnvelopeFit fit_envelope(const std::vector<Trajectory>& trajs, double tau, double alpha, double m_cap = 1e6,
                                int grid_size = 200, double fit_slack = 5e-4) {
  if (trajs.empty()) throw std::invalid_argument("fit_envelope: no trajectories");
  if (!(tau > 0.0) || alpha < 0.0) throw std::invalid_argument("fit_envelope: bad parameters");

  auto m_needed = [&](double rho) {
    double m = 1.0;
    for (const auto& traj : trajs) {
      const double x0n = traj.initial_norm();
      if (x0n == 0.0) continue;
      for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        const double denom =
            std::exp(alpha * tau * static_cast<double>(count_switches(traj.signal, 0.0, t))) *
            std::exp(-(rho + alpha) * t) * x0n;
        m = std::max(m, norm2(traj.states[k]) / denom);
      }
    }
    return m;
  };

  const double rho_lo = 1e-6, rho_hi = 10.0;
  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  for (int k = 0; k < grid_size; ++k)
    grid[static_cast<std::size_t>(k)] =
        rho_lo * std::pow(rho_hi / rho_lo, static_cast<double>(k) / static_cast<double>(grid_size - 1));

  // M(rho) is increasing, so the minimum sits at the smallest rate.
  const double m_min = m_needed(grid.front());
  if (m_min > m_cap) return {};

  const double m_budget = std::min(m_cap, m_min * (1.0 + fit_slack));
  double best = grid.front();
  std::size_t best_idx = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (m_needed(grid[k]) <= m_budget) {
      best = grid[k];
      best_idx = k;
    } else {
      break;
    }
  }
  // Refine the feasibility boundary between best and the next grid point.
  if (best_idx + 1 < grid.size()) {
    double lo = best, hi = grid[best_idx + 1];
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (m_needed(mid) <= m_budget)
        lo = mid;
      else
        hi = mid;
    }
    best = lo;
  }
  // Safety factor keeps check_envelope green on the same samples despite
  // the divide/multiply round trip.
  const double m_final = std::min(m_cap, m_needed(best) * (1.0 + 1e-12) + 0.0);
  return {true, DecayEnvelope::checked(std::max(1.0, m_final), best, alpha, tau)};
}

}  // namespace dwell
