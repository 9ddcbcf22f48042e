#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "awpi/analysis.hpp"

using namespace awpi;

namespace {
const PiParams kP{1.0, 20.0, -1.0, 1.0};
}

TEST(ChatterThreshold, EpmRampValue) {
  const auto p = chattering_threshold_epm(kP, 1e-3, -1e-3);
  EXPECT_NEAR(p.threshold_u, 0.0595, 1e-12);
  EXPECT_EQ(p.binding_k, 10);
  ASSERT_EQ(p.per_k_thresholds.size(), 10u);
  EXPECT_NEAR(p.per_k_thresholds.front().second, 0.1, 1e-12);
}

TEST(ChatterThreshold, ElmRampValue) {
  const auto p = chattering_threshold_elm(kP, 1e-3, -1e-3);
  EXPECT_NEAR(p.threshold_u, 0.0605, 1e-12);
  EXPECT_EQ(p.binding_k, 10);
}

TEST(ChatterThreshold, LiteralReadingBindsEarlier) {
  for (auto f : {&chattering_threshold_epm, &chattering_threshold_elm}) {
    const auto p = f(kP, 1e-3, -1e-3, std::nullopt, 10, SummandReading::literal);
    EXPECT_EQ(p.binding_k, 7);
    EXPECT_NEAR(p.threshold_u, 0.05 + 0.05 / 7 + 0.007, 1e-12);
  }
}

TEST(ChatterThreshold, KMaxOneIsFirstStepBound) {
  EXPECT_NEAR(chattering_threshold_epm(kP, 1e-3, -1e-3, std::nullopt, 1).threshold_u, 0.1, 1e-12);
}

TEST(ChatterThreshold, ReportsWhetherReferenceStaysUnlocked) {
  EXPECT_TRUE(*chattering_threshold_epm(kP, 1e-3, -1e-3, 0.05).stays_unlocked_at_ref);
  EXPECT_FALSE(*chattering_threshold_epm(kP, 1e-3, -1e-3, 0.2915).stays_unlocked_at_ref);
}

TEST(ChatterThreshold, RejectsNonDecreasingInputAndBadArguments) {
  EXPECT_THROW(chattering_threshold_epm(kP, 1e-3, 0.0), std::invalid_argument);
  EXPECT_THROW(chattering_threshold_elm(kP, 1e-3, 1e-3), std::invalid_argument);
  EXPECT_THROW(chattering_threshold_epm(kP, 0.0, -1e-3), std::invalid_argument);
  EXPECT_THROW(chattering_threshold_epm(kP, 1e-3, -1e-3, std::nullopt, 0), std::invalid_argument);
  const std::vector<double> inc{-1e-3, -1e-3};
  EXPECT_THROW(chattering_threshold(Method::itm, kP, 1e-3, inc), std::invalid_argument);
}

TEST(ChatterThreshold, ZeroIntegralGainIsUnbounded) {
  const PiParams p{1.0, 0.0, -1.0, 1.0};
  EXPECT_EQ(chattering_threshold_epm(p, 1e-3, -1e-3).threshold_u, kUnbounded);
}

TEST(ChatterThreshold, GeneralFormMatchesConstantRamp) {
  const std::vector<double> inc(11, -1e-3);
  EXPECT_DOUBLE_EQ(chattering_threshold(Method::epm, kP, 1e-3, inc).threshold_u,
                   chattering_threshold_epm(kP, 1e-3, -1e-3).threshold_u);
}

TEST(DeadlockBounds, DifferentiableMinimumStep) {
  EXPECT_NEAR(min_step_avoid_deadlock_differentiable(kP, 0.2915, -1.0, -1.0), 0.1915, 1e-12);
  EXPECT_THROW(min_step_avoid_deadlock_differentiable(kP, 0.2915, 0.0, 0.0), std::invalid_argument);
  EXPECT_EQ(min_step_avoid_deadlock_differentiable(PiParams{1, 0, -1, 1}, 0.2915, -1.0, -1.0), 0.0);
}

TEST(DeadlockBounds, ExitStep) {
  EXPECT_NEAR(max_step_exit_deadlock(kP, 0.2915, 1e-3), 3.431e-4, 1e-7);
  EXPECT_NEAR(max_step_exit_deadlock(kP, -0.2915, 1e-3), 3.431e-4, 1e-7);
  EXPECT_EQ(max_step_exit_deadlock(kP, 0.0, 1e-3), kUnbounded);
  EXPECT_THROW(max_step_exit_deadlock(kP, 0.3, 0.0), std::invalid_argument);
}

TEST(DeadlockBounds, DiscreteForm) {
  EXPECT_NEAR(min_step_avoid_deadlock_discrete(kP, 0.2915, -1e-3), 0.1 * 1e-3 / 0.2915, 1e-15);
  EXPECT_THROW(min_step_avoid_deadlock_discrete(kP, 0.0, -1e-3), std::invalid_argument);
  EXPECT_THROW(min_step_avoid_deadlock_discrete(kP, 0.3, 1e-3), std::invalid_argument);
  EXPECT_EQ(min_step_avoid_deadlock_discrete(PiParams{1, 0, -1, 1}, 0.3, -1e-3), kUnbounded);
}

TEST(DeadlockBounds, Bundle) {
  const auto b = deadlock_bounds(kP, 0.2915, -1.0, 1e-3, 1e-3);
  EXPECT_NEAR(b.h_min_avoid, 0.1915, 1e-12);
  EXPECT_NEAR(b.h_max_exit, 3.431e-4, 1e-7);
}

namespace {

StepRecord rec(double t, LimiterState before, LimiterState after, double u = 0.0,
               StepOutcome o = StepOutcome::converged) {
  StepRecord r;
  r.t = t;
  r.t_start = t - 1e-3;
  r.h_used = 1e-3;
  r.limiter_before = before;
  r.limiter_after = after;
  r.state_after.u = u;
  r.state_after.limiter = after;
  r.outcome = o;
  return r;
}

const auto W = LimiterState::within();
const auto U = LimiterState::upper();

}  // namespace

TEST(Detectors, ChatterStopSummary) {
  EventLog log;
  log.records = {rec(1, U, W, 0.10), rec(2, W, U, 0.09), rec(3, U, W, 0.08), rec(4, W, U, 0.07),
                 rec(5, U, W, 0.06), rec(6, W, W, 0.05)};
  const auto s = summarize_chatter_stop(log);
  EXPECT_EQ(s.relocks, 2u);
  EXPECT_DOUBLE_EQ(*s.last_relock_u, 0.07);
  EXPECT_DOUBLE_EQ(*s.last_failed_unlock_u, 0.08);
  EXPECT_DOUBLE_EQ(*s.final_unlock_u, 0.06);
  EXPECT_EQ(limiter_events(log).size(), 5u);
}

TEST(Detectors, NoChatterOnCleanRun) {
  EventLog log;
  log.records = {rec(1, W, W), rec(2, W, U), rec(3, U, U)};
  EXPECT_FALSE(summarize_chatter_stop(log).last_relock_u.has_value());
  EXPECT_TRUE(detect_chattering(log).empty());
  EXPECT_TRUE(detect_deadlock(log).empty());
}

TEST(Detectors, ChatteringIntervalsMerge) {
  EventLog log;
  for (int i = 0; i < 30; ++i) log.records.push_back(rec(i, W, W));
  log.records[3] = rec(3, W, U);
  log.records[5] = rec(5, U, W);
  log.records[9] = rec(9, W, U);
  log.records[25] = rec(25, U, W);
  const auto iv = detect_chattering(log, 10, 2);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_EQ(iv[0].first_step, 3u);
  EXPECT_EQ(iv[0].last_step, 9u);
  EXPECT_EQ(iv[0].toggles, 3u);
}

TEST(Detectors, DeadlockEpisodeEndsOnConvergedRetry) {
  EventLog log;
  log.records = {rec(1, U, U)};
  for (int i = 0; i < 3; ++i) {
    auto r = rec(1.001, U, W, 0.29, StepOutcome::not_converged);
    r.t_start = 1.0;
    r.h_used = 1e-3 - i * 1e-6;
    log.records.push_back(r);
  }
  auto ok = rec(1.001, U, W, 0.29, StepOutcome::converged_by_tolerance);
  ok.t_start = 1.0;
  ok.h_used = 0.997e-3;
  log.records.push_back(ok);
  const auto eps = detect_deadlock(log);
  ASSERT_EQ(eps.size(), 1u);
  EXPECT_EQ(eps[0].attempts, 3u);
  EXPECT_EQ(eps[0].exit_kind, DeadlockExit::tolerance);
  EXPECT_DOUBLE_EQ(eps[0].exit_h, 0.997e-3);
  EXPECT_EQ(eps[0].first_record, 1u);
}

TEST(Detectors, UnresolvedDeadlock) {
  EventLog log;
  auto r = rec(1.001, U, W, 0.29, StepOutcome::not_converged);
  r.t_start = 1.0;
  log.records = {r, r};
  const auto eps = detect_deadlock(log);
  ASSERT_EQ(eps.size(), 1u);
  EXPECT_EQ(eps[0].exit_kind, DeadlockExit::unresolved);
  EXPECT_EQ(eps[0].attempts, 2u);
}
