#include "dwell/simulate.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "dwell/signals.hpp"
#include "dwell/system.hpp"
#include "test_util.hpp"

using dwell::DecayEnvelope;
using dwell::Matrix;
using dwell::SwitchedSystem;
using dwell::SwitchingSignal;
using dwell::Trajectory;
using testutil::Rng;

namespace {

SwitchedSystem spiral_pair_system() {
  return SwitchedSystem::linear({testutil::spiral_pair_a1(), testutil::spiral_pair_a2()});
}

double spiral_pair_growth_factor() {
  const double t1 = testutil::spiral_pair_t1(), t2 = testutil::spiral_pair_t2();
  return std::exp(-(0.1 * t1 + 0.03 * t2)) * std::sqrt(2.0);
}

}  // namespace

TEST(FlowLinear, QuarterTurnClosedForm) {
  auto sys = spiral_pair_system();
  const double t1 = testutil::spiral_pair_t1();
  auto traj = dwell::flow_linear(sys, SwitchingSignal::constant(1, 2), std::vector<double>{1.0, 0.0}, t1);
  const auto& x = traj.states.back();
  const double scale = std::exp(-0.1 * t1);
  EXPECT_NEAR(x[0], 0.0, 1e-12);
  EXPECT_NEAR(x[1], -std::sqrt(2.0) * scale, 1e-12);
}

TEST(FlowLinear, ZeroStateStaysZero) {
  auto sys = spiral_pair_system();
  auto traj = dwell::flow_linear(sys, testutil::spiral_pair_signal(), std::vector<double>{0.0, 0.0}, 30.0, 0.1);
  for (const auto& x : traj.states) EXPECT_EQ(dwell::norm2(x), 0.0);
}

TEST(FlowLinear, SpiralPairPeriodMap) {
  auto sys = spiral_pair_system();
  auto sig = testutil::spiral_pair_signal();
  const double T = sig.period;
  auto traj = dwell::flow_linear(sys, sig, std::vector<double>{1.0, 0.0}, T);
  const auto& x = traj.states.back();
  const double g = spiral_pair_growth_factor();
  EXPECT_NEAR(x[0], g, 1e-10);
  EXPECT_NEAR(x[1], 0.0, 1e-10);
}

TEST(FlowLinear, SwitchingInstantsAreSampled) {
  auto sys = spiral_pair_system();
  auto sig = testutil::spiral_pair_signal();
  auto traj = dwell::flow_linear(sys, sig, std::vector<double>{1.0, 0.0}, 2.5 * sig.period, 0.05);
  for (double d : sig.discontinuities(2.5 * sig.period)) {
    bool found = false;
    for (double t : traj.times)
      if (t == d) {
        found = true;
        break;
      }
    EXPECT_TRUE(found) << "missing switching instant " << d;
  }
  // Times strictly increase and the state is continuous (single value per time).
  for (std::size_t k = 1; k < traj.times.size(); ++k) EXPECT_GT(traj.times[k], traj.times[k - 1]);
}

TEST(FlowLinear, LinearityOfTheFlow) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2;
    auto sys = SwitchedSystem::linear({testutil::random_matrix(rng, n, 1.0), testutil::random_matrix(rng, n, 1.0)});
    auto sig = testutil::random_signal(rng, 2, 4.0);
    std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    std::vector<double> y{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    std::vector<double> combo{a * x[0] + b * y[0], a * x[1] + b * y[1]};
    const double T = rng.uniform(0.5, 4.0);
    auto tx = dwell::flow_linear(sys, sig, x, T);
    auto ty = dwell::flow_linear(sys, sig, y, T);
    auto tc = dwell::flow_linear(sys, sig, combo, T);
    for (int i = 0; i < n; ++i) {
      const double expect = a * tx.states.back()[i] + b * ty.states.back()[i];
      EXPECT_NEAR(tc.states.back()[i], expect, 1e-8 * std::max(1.0, std::abs(expect)));
    }
  }
}

TEST(FlowLinear, TimeInvarianceViaShift) {
  auto sys = spiral_pair_system();
  auto sig = testutil::spiral_pair_signal();
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const double T1 = rng.uniform(0.5, 6.0), T2 = rng.uniform(0.5, 6.0);
    std::vector<double> x0{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    auto full = dwell::flow_linear(sys, sig, x0, T1 + T2);
    auto first = dwell::flow_linear(sys, sig, x0, T1);
    auto second = dwell::flow_linear(sys, dwell::shift(sig, T1), first.states.back(), T2);
    for (int i = 0; i < 2; ++i)
      EXPECT_NEAR(full.states.back()[i], second.states.back()[i], 1e-9 * std::max(1.0, std::abs(full.states.back()[i])));
  }
}

TEST(FlowLinear, BlowupGuardTruncates) {
  auto sys = SwitchedSystem::linear({Matrix::from_rows({{2.0, 0.0}, {0.0, 2.0}})});
  auto traj = dwell::flow_linear(sys, SwitchingSignal::constant(1, 1), std::vector<double>{1.0, 0.0}, 40.0, 0.5);
  EXPECT_TRUE(traj.blew_up);
  EXPECT_LT(traj.times.back(), 40.0);
}

TEST(FlowNonlinear, ScalarExponentialOracle) {
  auto sys = SwitchedSystem::nonlinear(1, {[](std::span<const double> x) {
                                         return std::vector<double>{-x[0]};
                                       }});
  auto traj = dwell::flow_nonlinear(sys, SwitchingSignal::constant(1, 1), std::vector<double>{1.0}, 1.0, 1e-3);
  EXPECT_NEAR(traj.states.back()[0], std::exp(-1.0), 1e-6);
}

TEST(FlowNonlinear, ZeroStateStaysZero) {
  auto sys = SwitchedSystem::nonlinear(2, {[](std::span<const double> x) {
                                         return std::vector<double>{-x[0] + x[1] * x[1], -x[1]};
                                       }});
  auto traj = dwell::flow_nonlinear(sys, SwitchingSignal::constant(1, 1), std::vector<double>{0.0, 0.0}, 3.0, 1e-2);
  for (const auto& x : traj.states) EXPECT_EQ(dwell::norm2(x), 0.0);
}

TEST(FlowNonlinear, CrossValidatesLinearFlow) {
  auto a1 = testutil::spiral_pair_a1();
  auto a2 = testutil::spiral_pair_a2();
  auto lin = spiral_pair_system();
  auto wrap = [](const Matrix& m) {
    return [m](std::span<const double> x) { return m * x; };
  };
  auto nl = SwitchedSystem::nonlinear(2, {wrap(a1), wrap(a2)});
  auto sig = testutil::spiral_pair_signal();
  const double T = 2.0 * sig.period;
  auto ref = dwell::flow_linear(lin, sig, std::vector<double>{1.0, 0.0}, T);
  auto rk = dwell::flow_nonlinear(nl, sig, std::vector<double>{1.0, 0.0}, T, 1e-3);
  EXPECT_NEAR(rk.states.back()[0], ref.states.back()[0], 1e-5);
  EXPECT_NEAR(rk.states.back()[1], ref.states.back()[1], 1e-5);
}

TEST(FlowNonlinear, BlowupReportsPartialTrajectory) {
  auto sys = SwitchedSystem::nonlinear(1, {[](std::span<const double> x) {
                                         return std::vector<double>{x[0] * x[0]};
                                       }});
  // dx = x^2 from x0 = 1 escapes at t = 1.
  auto traj = dwell::flow_nonlinear(sys, SwitchingSignal::constant(1, 1), std::vector<double>{1.0}, 2.0, 1e-4);
  EXPECT_TRUE(traj.blew_up);
  EXPECT_GT(traj.states.size(), 10u);
  EXPECT_LE(traj.blowup_time, 1.05);
}

TEST(SwitchedSystem, RejectsNonVanishingOrigin) {
  EXPECT_THROW(SwitchedSystem::nonlinear(1, {[](std::span<const double>) {
                 return std::vector<double>{1.0};
               }}),
               std::invalid_argument);
}

TEST(CheckEnvelope, ZeroTrajectoryHolds) {
  auto sys = spiral_pair_system();
  auto traj = dwell::flow_linear(sys, testutil::spiral_pair_signal(), std::vector<double>{0.0, 0.0}, 10.0, 0.1);
  EXPECT_TRUE(dwell::check_envelope(traj, DecayEnvelope::checked(1.0, 0.5, 0.0, 1.0)).holds);
}

TEST(CheckEnvelope, SaturatedExponentialHolds) {
  auto sys = SwitchedSystem::nonlinear(1, {[](std::span<const double> x) {
                                         return std::vector<double>{-x[0]};
                                       }});
  auto traj = dwell::flow_nonlinear(sys, SwitchingSignal::constant(1, 1), std::vector<double>{1.0}, 5.0, 1e-3);
  EXPECT_TRUE(dwell::check_envelope(traj, DecayEnvelope::checked(1.0, 1.0, 0.0, 3.0)).holds);
}

TEST(CheckEnvelope, SpiralPairDivergenceViolatesFlatEnvelope) {
  // With alpha = 0 the bound forces decay while the per-period growth is
  // about 1.0987, so the check must eventually report a violation.
  auto sys = spiral_pair_system();
  auto sig = testutil::spiral_pair_signal();
  auto traj = dwell::flow_linear(sys, sig, std::vector<double>{1.0, 0.0}, 30.0 * sig.period, 0.5);
  ASSERT_FALSE(traj.blew_up);
  auto verdict = dwell::check_envelope(traj, DecayEnvelope::checked(10.0, 0.001, 0.0, 2.1));
  EXPECT_FALSE(verdict.holds);
  EXPECT_GT(verdict.lhs, verdict.rhs);
}

TEST(FitEnvelope, RecoversPureExponential) {
  auto sys = SwitchedSystem::nonlinear(1, {[](std::span<const double> x) {
                                         return std::vector<double>{-x[0]};
                                       }});
  auto traj = dwell::flow_nonlinear(sys, SwitchingSignal::constant(1, 1), std::vector<double>{1.0}, 10.0, 1e-3);
  auto fit = dwell::fit_envelope({traj}, 1.0, 0.0);
  ASSERT_TRUE(fit.feasible);
  EXPECT_GE(fit.envelope.rho, 1.0 - 1e-3);
  EXPECT_LE(fit.envelope.M, 1.0 + 1e-3);
  EXPECT_TRUE(dwell::check_envelope({traj}, fit.envelope).holds);
}

TEST(FitEnvelope, DivergentTrajectoryInfeasible) {
  auto sys = spiral_pair_system();
  auto sig = testutil::spiral_pair_signal();
  // Enough periods for the growth (~1.0987 per period) to exceed the cap.
  auto traj = dwell::flow_linear(sys, sig, std::vector<double>{1.0, 0.0}, 160.0 * sig.period, 1.0);
  ASSERT_FALSE(traj.blew_up);
  auto fit = dwell::fit_envelope({traj}, 2.1, 0.0);
  EXPECT_FALSE(fit.feasible);
}

TEST(FitEnvelope, RejectsEmptyInput) {
  EXPECT_THROW(dwell::fit_envelope({}, 1.0, 0.0), std::invalid_argument);
}

TEST(FlowLinear, DenseGridAgreesWithSegmentPropagation) {
  // Stepping through a segment with many exponential factors must match
  // the single direct factor (semigroup consistency of the propagators).
  auto sys = spiral_pair_system();
  auto sig = testutil::spiral_pair_signal();
  Rng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x0{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const double T = rng.uniform(1.0, 3.0) * sig.period;
    auto coarse = dwell::flow_linear(sys, sig, x0, T);
    auto dense = dwell::flow_linear(sys, sig, x0, T, 0.037);
    ASSERT_DOUBLE_EQ(coarse.times.back(), dense.times.back());
    for (int i = 0; i < 2; ++i)
      EXPECT_NEAR(dense.states.back()[i], coarse.states.back()[i],
                  1e-10 * std::max(1.0, std::abs(coarse.states.back()[i])));
  }
}

TEST(FlowNonlinear, SwitchedCubicModesMatchPiecewiseClosedForm) {
  // Mode 1: dx = -x^3 with x(t) = x0 / sqrt(1 + 2 x0^2 t); mode 2:
  // dx = -x. Composing the closed forms across the switch times gives the
  // oracle for the snapped-grid integrator.
  auto sys = SwitchedSystem::nonlinear(1, {[](std::span<const double> x) {
                                             return std::vector<double>{-x[0] * x[0] * x[0]};
                                           },
                                           [](std::span<const double> x) {
                                             return std::vector<double>{-x[0]};
                                           }});
  auto sig = SwitchingSignal::make({0.0, 0.7, 1.9}, {1, 2, 1}, 2);
  const double x0 = 1.7, T = 3.0;
  auto traj = dwell::flow_nonlinear(sys, sig, std::vector<double>{x0}, T, 1e-3);
  auto cubic = [](double x, double t) { return x / std::sqrt(1.0 + 2.0 * x * x * t); };
  const double after1 = cubic(x0, 0.7);
  const double after2 = after1 * std::exp(-(1.9 - 0.7));
  const double expected = cubic(after2, T - 1.9);
  EXPECT_NEAR(traj.states.back()[0], expected, 1e-8);
}
