#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dwell {

/// Finite piecewise-constant, right-continuous switching signal on [0, inf)
/// taking values in {1..mode_count}. Breakpoints start at t0 = 0, which by
/// convention counts as a discontinuity point. The tail either holds the
/// last mode forever or repeats the whole pattern with period T.
struct SwitchingSignal {
  enum class Tail { constant, periodic };

  std::vector<double> breakpoints;  // strictly increasing, breakpoints[0] == 0
  std::vector<int> modes;           // modes[k] active on [t_k, t_{k+1}), 1-based
  Tail tail = Tail::constant;
  double period = 0.0;  // > breakpoints.back() when periodic
  int mode_count = 1;

  /// Validates, merges adjacent equal modes, and returns the signal.
  static SwitchingSignal make(std::vector<double> breakpoints, std::vector<int> modes, int mode_count,
                              Tail tail = Tail::constant, double period = 0.0) {
    if (breakpoints.empty() || breakpoints.front() != 0.0)
      throw std::invalid_argument("SwitchingSignal: first breakpoint must be 0");
    if (breakpoints.size() != modes.size())
      throw std::invalid_argument("SwitchingSignal: breakpoints and modes must have equal length");
    if (mode_count < 1) throw std::invalid_argument("SwitchingSignal: mode_count must be >= 1");
    for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k)
      if (!(breakpoints[k] < breakpoints[k + 1]))
        throw std::invalid_argument("SwitchingSignal: breakpoints must be strictly increasing");
    for (int m : modes)
      if (m < 1 || m > mode_count) throw std::invalid_argument("SwitchingSignal: mode index out of range");

    // Adjacent equal modes describe the same signal; merge them so every
    // listed breakpoint is a genuine discontinuity.
    std::vector<double> bp;
    std::vector<int> md;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      if (!md.empty() && md.back() == modes[k]) continue;
      bp.push_back(breakpoints[k]);
      md.push_back(modes[k]);
    }
    SwitchingSignal s;
    s.breakpoints = std::move(bp);
    s.modes = std::move(md);
    s.mode_count = mode_count;
    s.tail = tail;
    s.period = period;
    if (tail == Tail::periodic) {
      if (!(period > s.breakpoints.back()))
        throw std::invalid_argument("SwitchingSignal: period must exceed the last breakpoint");
    } else {
      s.period = 0.0;
    }
    return s;
  }

  static SwitchingSignal constant(int mode, int mode_count) {
    return make({0.0}, {mode}, mode_count);
  }

  int mode_at(double t) const {
    if (t < 0.0) throw std::invalid_argument("mode_at: negative time");
    double u = t;
    if (tail == Tail::periodic) {
      u = std::fmod(t, period);
      if (u < 0.0) u += period;
    }
    // Last breakpoint <= u.
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), u);
    const std::size_t k = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
    return modes[k];
  }

  /// Whether the periodic wrap at multiples of T is itself a discontinuity.
  bool wrap_switches() const { return tail == Tail::periodic && modes.back() != modes.front(); }

  /// Number of genuine discontinuities that recur in each period (for
  /// periodic signals): the interior breakpoints plus the wrap when the
  /// pattern ends in a different mode than it starts.
  int switches_per_period() const {
    if (tail != Tail::periodic) throw std::logic_error("switches_per_period: signal is not periodic");
    return static_cast<int>(breakpoints.size()) - 1 + (wrap_switches() ? 1 : 0);
  }

  struct Discontinuity {
    double t;
    int mode;  // mode active on [t, next)
  };

  /// All discontinuity points in [0, upto) with the mode they activate, in
  /// increasing order. t0 = 0 is included. The mode comes from the pattern
  /// itself, not from a floating-point time lookup, so unrolled boundary
  /// times carry the correct mode even when fmod would round across them.
  /// A cap guards against runaway unrolling of periodic tails.
  std::vector<Discontinuity> discontinuities_with_modes(double upto, std::size_t cap = 1u << 20) const {
    std::vector<Discontinuity> out;
    if (upto <= 0.0) return out;
    out.push_back({0.0, modes[0]});
    for (std::size_t k = 1; k < breakpoints.size(); ++k)
      if (breakpoints[k] < upto) out.push_back({breakpoints[k], modes[k]});
    if (tail == Tail::periodic) {
      for (long p = 1;; ++p) {
        const double base = static_cast<double>(p) * period;
        if (base >= upto) break;
        if (wrap_switches()) out.push_back({base, modes[0]});
        for (std::size_t k = 1; k < breakpoints.size(); ++k) {
          const double t = base + breakpoints[k];
          if (t < upto) out.push_back({t, modes[k]});
        }
        if (out.size() > cap) throw std::runtime_error("discontinuities: unroll cap exceeded");
      }
    }
    return out;
  }

  /// Discontinuity times only.
  std::vector<double> discontinuities(double upto, std::size_t cap = 1u << 20) const {
    std::vector<double> out;
    for (const auto& d : discontinuities_with_modes(upto, cap)) out.push_back(d.t);
    return out;
  }
};

/// Counts discontinuity points of the signal in the half-open window [s, t).
inline long count_switches(const SwitchingSignal& sig, double s, double t) {
  if (s < 0.0 || t < 0.0) throw std::invalid_argument("count_switches: negative time");
  if (s > t) throw std::invalid_argument("count_switches: window start exceeds end");
  if (s == t) return 0;
  long n = 0;
  for (double d : sig.discontinuities(t))
    if (d >= s) ++n;
  return n;
}

/// Membership class for switching signals.
struct SignalClassSpec {
  enum class Kind { dwell, average_dwell, eventually_average };
  Kind kind = Kind::dwell;
  double tau = 1.0;
  int chattering_bound = 1;  // N0, average_dwell only

  static SignalClassSpec dwell(double tau) { return checked({Kind::dwell, tau, 1}); }
  static SignalClassSpec average_dwell(double tau, int n0) { return checked({Kind::average_dwell, tau, n0}); }
  static SignalClassSpec eventually_average(double tau) { return checked({Kind::eventually_average, tau, 1}); }

  static SignalClassSpec checked(SignalClassSpec s) {
    if (!(s.tau > 0.0)) throw std::invalid_argument("SignalClassSpec: tau must be positive");
    if (s.kind == Kind::average_dwell && s.chattering_bound < 1)
      throw std::invalid_argument("SignalClassSpec: chattering bound must be >= 1");
    return s;
  }
};

struct ClassVerdict {
  bool member = true;
  double witness_s = 0.0;  // violating window [s, t] (or gap endpoints, for dwell)
  double witness_t = 0.0;
  std::string detail;

  static ClassVerdict yes() { return {}; }
  static ClassVerdict no(double s, double t, std::string d) { return {false, s, t, std::move(d)}; }
};

/// Decides membership of a signal in a dwell-time, average-dwell-time, or
/// eventually-average class.
///
/// Average-dwell membership is decidable for these representations by
/// checking windows anchored at discontinuity pairs: the worst window
/// [s, t) has s at a discontinuity and t just above one, so it suffices to
/// test counts on closed spans [t_j, t_k] against N0 + (t_k - t_j)/tau.
/// Periodic tails are unrolled N0 + 3 periods; beyond that the per-period
/// average makes violations monotone.
inline ClassVerdict classify(const SwitchingSignal& sig, const SignalClassSpec& spec) {
  using Kind = SignalClassSpec::Kind;
  const double tau = spec.tau;

  if (spec.kind == Kind::eventually_average) {
    if (sig.tail != SwitchingSignal::Tail::periodic)
      throw std::invalid_argument("classify: eventually-average membership is undecidable for finite-horizon signals");
    // Recurring switches per period vs the tau budget. For patterns whose
    // last mode differs from the first this equals N_sigma(0, T).
    const double per_period = static_cast<double>(sig.switches_per_period());
    if (per_period <= sig.period / tau) return ClassVerdict::yes();
    return ClassVerdict::no(0.0, sig.period,
                            "per-period switch count " + std::to_string(sig.switches_per_period()) +
                                " exceeds T/tau = " + std::to_string(sig.period / tau));
  }

  double horizon;
  if (sig.tail == SwitchingSignal::Tail::periodic) {
    const int periods = (spec.kind == Kind::average_dwell ? spec.chattering_bound + 3 : 2);
    horizon = sig.period * static_cast<double>(periods);
  } else {
    horizon = sig.breakpoints.back();
  }
  const std::vector<double> disc = sig.discontinuities(std::nextafter(horizon, horizon + 1.0));

  if (spec.kind == Kind::dwell) {
    for (std::size_t k = 1; k < disc.size(); ++k) {
      const double gap = disc[k] - disc[k - 1];
      if (gap < tau)
        return ClassVerdict::no(disc[k - 1], disc[k],
                                "gap " + std::to_string(gap) + " below dwell time " + std::to_string(tau));
    }
    return ClassVerdict::yes();
  }

  // average_dwell: count on [t_j, t_k] inclusive of both ends.
  const double n0 = static_cast<double>(spec.chattering_bound);
  for (std::size_t j = 0; j < disc.size(); ++j) {
    for (std::size_t k = j; k < disc.size(); ++k) {
      const double count = static_cast<double>(k - j + 1);
      const double budget = n0 + (disc[k] - disc[j]) / tau;
      if (count > budget)
        return ClassVerdict::no(disc[j], disc[k],
                                std::to_string(k - j + 1) + " switches in a window of length " +
                                    std::to_string(disc[k] - disc[j]));
    }
  }
  return ClassVerdict::yes();
}

/// sigma diamond_delta gamma: equals sig_a on [0, delta) and
/// sig_b(. - delta) afterwards; the boundary merges when the mode of sig_a
/// just before delta equals sig_b(0). The continuation signal must have a
/// constant tail, otherwise the result is not representable in this form.
inline SwitchingSignal concat(const SwitchingSignal& sig_a, const SwitchingSignal& sig_b, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("concat: delta must be positive");
  if (sig_b.tail != SwitchingSignal::Tail::constant)
    throw std::invalid_argument("concat: continuation with a periodic tail is not representable");
  if (sig_a.mode_count != sig_b.mode_count) throw std::invalid_argument("concat: mode_count mismatch");

  std::vector<double> bp;
  std::vector<int> md;
  for (const auto& d : sig_a.discontinuities_with_modes(delta)) {
    bp.push_back(d.t);
    md.push_back(d.mode);
  }
  for (std::size_t k = 0; k < sig_b.breakpoints.size(); ++k) {
    bp.push_back(delta + sig_b.breakpoints[k]);
    md.push_back(sig_b.modes[k]);
  }
  // make() merges the boundary when modes coincide.
  return SwitchingSignal::make(std::move(bp), std::move(md), sig_a.mode_count);
}

/// sigma(. + t0), renormalized to start at breakpoint 0.
inline SwitchingSignal shift(const SwitchingSignal& sig, double t0) {
  if (t0 < 0.0) throw std::invalid_argument("shift: t0 must be nonnegative");
  if (t0 == 0.0) return sig;

  if (sig.tail == SwitchingSignal::Tail::periodic) {
    // Rotate the pattern: discontinuities in [t0, t0 + T) map to [0, T).
    // The mode holding at t0 comes from the last discontinuity at or
    // before t0 so that boundary times stay consistent with the pattern.
    const double T = sig.period;
    const auto disc = sig.discontinuities_with_modes(t0 + T);
    int start_mode = sig.modes[0];
    std::vector<double> bp{0.0};
    std::vector<int> md;
    std::vector<double> later;
    std::vector<int> later_modes;
    for (const auto& d : disc) {
      if (d.t <= t0) {
        start_mode = d.mode;
      } else {
        later.push_back(d.t - t0);
        later_modes.push_back(d.mode);
      }
    }
    md.push_back(start_mode);
    bp.insert(bp.end(), later.begin(), later.end());
    md.insert(md.end(), later_modes.begin(), later_modes.end());
    return SwitchingSignal::make(std::move(bp), std::move(md), sig.mode_count, SwitchingSignal::Tail::periodic, T);
  }

  int start_mode = sig.modes[0];
  std::vector<double> bp{0.0};
  std::vector<int> md;
  std::vector<double> later;
  std::vector<int> later_modes;
  for (std::size_t k = 0; k < sig.breakpoints.size(); ++k) {
    if (sig.breakpoints[k] <= t0) {
      start_mode = sig.modes[k];
    } else {
      later.push_back(sig.breakpoints[k] - t0);
      later_modes.push_back(sig.modes[k]);
    }
  }
  md.push_back(start_mode);
  bp.insert(bp.end(), later.begin(), later.end());
  md.insert(md.end(), later_modes.begin(), later_modes.end());
  return SwitchingSignal::make(std::move(bp), std::move(md), sig.mode_count);
}

namespace detail {

/// Deterministic uniform double in [0, 1) from splitmix64; avoids the
/// implementation-defined std:: distributions so seeds reproduce across
/// toolchains.
class SignalRng {
public:
  explicit SignalRng(std::uint64_t seed) : state_(seed) {}
  double uniform() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform() * static_cast<double>(hi - lo + 1));
  }
  int other_mode(int current, int mode_count) {
    if (mode_count == 1) return current;
    int m = uniform_int(1, mode_count - 1);
    return m < current ? m : m + 1;
  }

private:
  std::uint64_t state_;
};

}  // namespace detail

/// Draws a member of the requested class, deterministically in the seed.
/// Generation is constructive (dwell-sized gaps, with occasional bursts
/// that spend the chattering budget) and every candidate is re-checked
/// with classify; the dwell-spaced fallback is a member of every class
/// handled here.
inline SwitchingSignal sample_signal(const SignalClassSpec& spec, double horizon, std::uint64_t rng_seed,
                                     int mode_count) {
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_signal: horizon must be positive");
  if (mode_count < 1) throw std::invalid_argument("sample_signal: mode_count must be >= 1");
  using Kind = SignalClassSpec::Kind;
  detail::SignalRng rng(rng_seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);

  auto dwell_spaced = [&](detail::SignalRng& r) {
    std::vector<double> bp{0.0};
    std::vector<int> md{r.uniform_int(1, mode_count)};
    double t = 0.0;
    while (true) {
      t += spec.tau * r.uniform(1.0, 2.5);
      if (t >= horizon) break;
      bp.push_back(t);
      md.push_back(r.other_mode(md.back(), mode_count));
    }
    return SwitchingSignal::make(std::move(bp), std::move(md), mode_count);
  };

  if (spec.kind == Kind::eventually_average) {
    // Periodic pattern with the per-period switch count within budget.
    const int budget = std::max(1, static_cast<int>(std::floor(horizon / spec.tau)));
    const int switches = rng.uniform_int(1, std::min(budget, 6));
    std::vector<double> bp{0.0};
    std::vector<int> md{rng.uniform_int(1, mode_count)};
    for (int k = 1; k < switches; ++k) {
      bp.push_back(horizon * (static_cast<double>(k) + rng.uniform(0.0, 0.5)) / static_cast<double>(switches + 1));
      md.push_back(rng.other_mode(md.back(), mode_count));
    }
    // Close the period with a genuine wrap discontinuity when possible.
    if (mode_count > 1 && md.back() == md.front()) {
      bp.push_back(horizon * (static_cast<double>(switches) + 0.5) / static_cast<double>(switches + 1));
      md.push_back(rng.other_mode(md.back(), mode_count));
    }
    auto sig = SwitchingSignal::make(std::move(bp), std::move(md), mode_count, SwitchingSignal::Tail::periodic,
                                     horizon);
    if (classify(sig, spec).member) return sig;
    return SwitchingSignal::make({0.0}, {1}, mode_count, SwitchingSignal::Tail::periodic, horizon);
  }

  if (spec.kind == Kind::dwell || spec.chattering_bound == 1 || mode_count == 1) {
    return dwell_spaced(rng);
  }

  // average_dwell with room for bursts: short flurries of up to N0 - 1
  // switches, each paid for by a long quiet stretch.
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<double> bp{0.0};
    std::vector<int> md{rng.uniform_int(1, mode_count)};
    double t = 0.0;
    while (true) {
      if (rng.uniform() < 0.3) {
        const int burst = rng.uniform_int(1, spec.chattering_bound - 1);
        const double dper = spec.tau / 64.0;
        bool fits = true;
        for (int b = 0; b < burst && fits; ++b) {
          t += dper;
          if (t >= horizon) {
            fits = false;
            break;
          }
          bp.push_back(t);
          md.push_back(rng.other_mode(md.back(), mode_count));
        }
        t += spec.tau * (static_cast<double>(burst) + rng.uniform(1.0, 2.0));
      } else {
        t += spec.tau * rng.uniform(1.0, 2.5);
      }
      if (t >= horizon) break;
      bp.push_back(t);
      md.push_back(rng.other_mode(md.back(), mode_count));
    }
    auto sig = SwitchingSignal::make(std::move(bp), std::move(md), mode_count);
    if (classify(sig, spec).member) return sig;
  }
  return dwell_spaced(rng);
}

}  // namespace dwell
