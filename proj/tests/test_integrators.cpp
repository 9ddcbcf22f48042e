#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "awpi/integrators.hpp"

using namespace awpi;

namespace {

const PiParams kP{1.0, 20.0, -1.0, 1.0};

SimState within_state(double x, double u) {
  return SimState{0.0, x, kP.kp() * u + x, kP.kp() * u + x, u, LimiterState::within()};
}

SimState upper_state(double x, double u) {
  return SimState{0.0, x, kP.kp() * u + x, kP.w_max(), u, LimiterState::upper()};
}

}  // namespace

TEST(Method, ParsesCaseInsensitively) {
  EXPECT_EQ(method_from_string("EPM"), Method::epm);
  EXPECT_EQ(method_from_string("elm"), Method::elm);
  EXPECT_EQ(method_from_string("Itm"), Method::itm);
  EXPECT_THROW(method_from_string("rk4"), std::invalid_argument);
  EXPECT_EQ(to_string(Method::itm), "itm");
}

TEST(StepEpm, UsesOldStateForOutputAndNewStatusForIntegrator) {
  const auto r = step_epm(kP, within_state(0.2, 0.1), 0.3, 1e-3);
  EXPECT_DOUBLE_EQ(r.state_after.y, 0.5);
  EXPECT_DOUBLE_EQ(r.state_after.x, 0.2 + 1e-3 * 20.0 * 0.3);
  EXPECT_EQ(r.limiter_after, LimiterState::within());
  EXPECT_DOUBLE_EQ(r.t, 1e-3);
}

TEST(StepEpm, LocksAndFreezesInTheSameStep) {
  const auto r = step_epm(kP, within_state(0.95, 0.0), 0.1, 1e-3);
  EXPECT_EQ(r.limiter_after, LimiterState::upper());
  EXPECT_DOUBLE_EQ(r.state_after.x, 0.95);
  EXPECT_DOUBLE_EQ(r.state_after.w, 1.0);
  EXPECT_TRUE(r.toggled());
}

TEST(StepElm, IntegratorGatedByPreviousStatus) {
  // Previous status upper: x stays frozen even though the new y unlocks.
  const auto r = step_elm(kP, upper_state(0.95, 0.1), 0.01, 1e-3);
  EXPECT_DOUBLE_EQ(r.state_after.x, 0.95);
  EXPECT_EQ(r.limiter_after, LimiterState::within());
  // Previous within: x integrates, then y is computed from the new x.
  const auto r2 = step_elm(kP, within_state(0.2, 0.1), 0.3, 1e-3);
  EXPECT_DOUBLE_EQ(r2.state_after.x, 0.2 + 0.006);
  EXPECT_DOUBLE_EQ(r2.state_after.y, 0.3 + 0.206);
}

TEST(StepItm, TrapezoidWhenLimiterInactive) {
  // The first pass is measured against the previous step's y, so the input
  // change alone keeps it above epsilon; the second pass repeats the solve.
  const auto r = step_itm(kP, within_state(0.1, 0.2), 0.25, 1e-3, ItmSettings{});
  EXPECT_EQ(r.outcome, StepOutcome::converged);
  EXPECT_EQ(r.n_iterations, 2);
  EXPECT_DOUBLE_EQ(r.state_after.x, 0.1 + 0.5e-3 * 20.0 * (0.25 + 0.2));
  EXPECT_DOUBLE_EQ(r.iteration_trace[1].increment, 0.0);
}

TEST(StepItm, SinglePassWhenInputSteady) {
  ItmSettings s{};
  s.epsilon = 1e-2;
  const auto r = step_itm(kP, within_state(0.1, 0.2), 0.2, 1e-3, s);
  EXPECT_EQ(r.outcome, StepOutcome::converged);
  EXPECT_EQ(r.n_iterations, 1);
  ASSERT_EQ(r.iteration_trace.size(), 1u);
  EXPECT_DOUBLE_EQ(r.iteration_trace[0].increment, 0.5e-3 * 20.0 * 0.4);
}

TEST(StepItm, TogglingStepFailsWhenHalfStepIncrementExceedsTolerance) {
  // delta = 0.5*h*ki*u = 2.9e-3 > epsilon: status toggles every pass.
  const double u = 0.29;
  const double h = 1e-3;
  const double delta = 0.5 * h * kP.ki() * u;
  const double x_prev = kP.w_max() - delta / 2 - u;
  SimState prev = upper_state(x_prev, u + delta / 2);
  prev.y = kP.w_max();
  const auto r = step_itm(kP, prev, u, h, ItmSettings{});
  EXPECT_EQ(r.outcome, StepOutcome::not_converged);
  EXPECT_EQ(r.n_iterations, 20);
  for (std::size_t i = 1; i < r.iteration_trace.size(); ++i) {
    EXPECT_NE(r.iteration_trace[i].status_in, r.iteration_trace[i - 1].status_in);
  }
}

TEST(AdaptStep, GrowsShrinksAndClamps) {
  const ItmSettings s{};
  EXPECT_DOUBLE_EQ(adapt_step(5e-4, 1, s), 5e-4 + 1e-6);
  EXPECT_DOUBLE_EQ(adapt_step(5e-4, 3, s), 5e-4 + 1e-6);
  EXPECT_DOUBLE_EQ(adapt_step(5e-4, 4, s), 5e-4);
  EXPECT_DOUBLE_EQ(adapt_step(5e-4, 14, s), 5e-4);
  EXPECT_DOUBLE_EQ(adapt_step(5e-4, 15, s), 5e-4 - 1e-6);
  EXPECT_DOUBLE_EQ(adapt_step(1e-3, 1, s), 1e-3);
  EXPECT_DOUBLE_EQ(adapt_step(1e-5, 20, s), 1e-5);
}

TEST(ItmSettings, Validate) {
  EXPECT_NO_THROW(ItmSettings{}.validate());
  ItmSettings bad{};
  bad.epsilon = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = ItmSettings{};
  bad.h_init = 2e-3;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = ItmSettings{};
  bad.n_iter_max = 1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Initialize, SolvesForIntegratorState) {
  const SignalSpec sig{ConstantSignal{0.3}};
  const auto s = initialize(kP, sig, 0.5, 0.0);
  EXPECT_DOUBLE_EQ(s.x, 0.2);
  EXPECT_EQ(s.limiter, LimiterState::within());
  EXPECT_EQ(initialize(kP, sig, 1.0).limiter, LimiterState::upper());
  EXPECT_THROW(initialize(kP, sig, 1.5), std::invalid_argument);
}
