#include "awpi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace awpi {

ChatterPrediction chattering_threshold(Method method, const PiParams& params, double h,
                                       std::span<const double> increments, std::optional<double> u_ref,
                                       SummandReading reading) {
  if (method == Method::itm) {
    throw std::invalid_argument("chattering thresholds apply to EPM and ELM only");
  }
  if (!(h > 0.0)) throw std::invalid_argument("chattering threshold: h must be > 0");
  if (increments.size() < 2) {
    throw std::invalid_argument("chattering threshold: need increments for at least k = 0..1");
  }

  const int k_max = static_cast<int>(increments.size()) - 1;
  const bool elm = method == Method::elm;

  // offset[i] = u_{t+ih} - u_t
  std::vector<double> offset(increments.size(), 0.0);
  for (std::size_t i = 1; i < increments.size(); ++i) offset[i] = offset[i - 1] + increments[i];

  ChatterPrediction out;
  out.method = method;
  out.reading = reading;
  out.k_max = k_max;
  out.per_k_thresholds.reserve(static_cast<std::size_t>(k_max));

  const double hki = h * params.ki();
  for (int k = 1; k <= k_max; ++k) {
    double du_sum = 0.0;
    for (int i = 0; i <= k; ++i) du_sum += increments[static_cast<std::size_t>(i)];

    // EPM sums i = 0..k-1, ELM sums i = 1..k (x runs one step ahead).
    const int lo = elm ? 1 : 0;
    const int hi = elm ? k : k - 1;
    double integrator_sum = 0.0;
    for (int i = lo; i <= hi; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      integrator_sum += reading == SummandReading::cumulative ? offset[ui] : k * increments[ui];
    }

    // Condition: kp*du_sum + h*ki*(k*u_t + integrator_sum) < 0, linear in u_t.
    const double slope = hki * k;
    const double intercept = params.kp() * du_sum + hki * integrator_sum;
    double bound;
    if (slope > 0.0) {
      bound = -intercept / slope;
    } else {
      bound = intercept < 0.0 ? kUnbounded : -kUnbounded;
    }
    out.per_k_thresholds.emplace_back(k, bound);
    if (k == 1 || bound < out.threshold_u) {
      out.threshold_u = bound;
      out.binding_k = k;
    }
  }
  if (u_ref) out.stays_unlocked_at_ref = *u_ref < out.threshold_u;
  return out;
}

namespace {

ChatterPrediction constant_ramp(Method method, const PiParams& params, double h, double du_per_step,
                                std::optional<double> u_ref, int k_max, SummandReading reading) {
  if (!(du_per_step < 0.0)) {
    throw std::invalid_argument("chattering threshold: du_per_step must be < 0 (decreasing input)");
  }
  if (k_max < 1) throw std::invalid_argument("chattering threshold: k_max must be >= 1");
  const std::vector<double> increments(static_cast<std::size_t>(k_max) + 1, du_per_step);
  return chattering_threshold(method, params, h, increments, u_ref, reading);
}

}  // namespace

ChatterPrediction chattering_threshold_epm(const PiParams& params, double h, double du_per_step,
                                           std::optional<double> u_ref, int k_max, SummandReading reading) {
  return constant_ramp(Method::epm, params, h, du_per_step, u_ref, k_max, reading);
}

ChatterPrediction chattering_threshold_elm(const PiParams& params, double h, double du_per_step,
                                           std::optional<double> u_ref, int k_max, SummandReading reading) {
  return constant_ramp(Method::elm, params, h, du_per_step, u_ref, k_max, reading);
}

double min_step_avoid_deadlock_discrete(const PiParams& params, double u_t, double du_t) {
  if (!(u_t > 0.0)) throw std::invalid_argument("deadlock bound: u_t must be > 0");
  if (du_t > 0.0) throw std::invalid_argument("deadlock bound: du_t must be <= 0 (decreasing input)");
  if (params.ki() == 0.0) return kUnbounded;
  return -(2.0 * params.kp() / params.ki()) * (du_t / u_t);
}

double min_step_avoid_deadlock_differentiable(const PiParams& params, double u_prev, double udot_t,
                                              double udot_prev) {
  const double rate_sum = udot_t + udot_prev;
  if (!(rate_sum < 0.0)) {
    throw std::invalid_argument("deadlock bound: udot_t + udot_prev must be < 0 (decreasing input)");
  }
  if (params.ki() == 0.0) return 0.0;
  // From h*(s) < -2 (kp/ki) s - 2 u_prev with s < 0.
  return -2.0 * (params.kp() / params.ki()) - 2.0 * u_prev / rate_sum;
}

double max_step_exit_deadlock(const PiParams& params, double u_t, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("deadlock bound: epsilon must be > 0");
  if (u_t == 0.0 || params.ki() == 0.0) return kUnbounded;
  return 2.0 * epsilon / (params.ki() * std::abs(u_t));
}

DeadlockBounds deadlock_bounds(const PiParams& params, double u_ref, double udot, double h, double epsilon) {
  DeadlockBounds b;
  b.h_min_avoid = min_step_avoid_deadlock_differentiable(params, u_ref, udot, udot);
  b.h_max_exit = max_step_exit_deadlock(params, u_ref, epsilon);
  b.h_avoid_discrete = min_step_avoid_deadlock_discrete(params, u_ref, udot * h);
  return b;
}

std::vector<LimiterEvent> limiter_events(const EventLog& log) {
  std::vector<LimiterEvent> out;
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    if (!r.toggled()) continue;
    out.push_back(LimiterEvent{i, r.t, r.state_after.u, r.limiter_before, r.limiter_after});
  }
  return out;
}

ChatterStop summarize_chatter_stop(const EventLog& log) {
  ChatterStop out;
  std::optional<LimiterEvent> last_unlock;
  for (const auto& ev : limiter_events(log)) {
    if (ev.from.limited() && !ev.to.limited()) {
      if (out.last_relock_u && last_unlock && ev.from == last_unlock->from && !out.final_unlock_u) {
        out.final_unlock_u = ev.u;
      }
      last_unlock = ev;
      continue;
    }
    if (!ev.from.limited() && ev.to.limited() && last_unlock && last_unlock->from == ev.to) {
      out.last_relock_u = ev.u;
      out.last_failed_unlock_u = last_unlock->u;
      out.final_unlock_u.reset();
      ++out.relocks;
    }
  }
  return out;
}

std::vector<ChatterInterval> detect_chattering(const EventLog& log, int window, int min_toggles) {
  const auto steps = log.accepted();
  std::vector<std::size_t> toggles;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i]->limiter_before != steps[i]->limiter_after) toggles.push_back(i);
  }

  std::vector<ChatterInterval> out;
  if (window < 1 || min_toggles < 1) return out;
  const auto w = static_cast<std::size_t>(window);
  const auto need = static_cast<std::size_t>(min_toggles);

  for (std::size_t j = 0; j < toggles.size(); ++j) {
    std::size_t last = j;
    while (last + 1 < toggles.size() && toggles[last + 1] < toggles[j] + w) ++last;
    if (last - j + 1 < need) continue;

    const std::size_t first_step = toggles[j];
    const std::size_t last_step = toggles[last];
    if (!out.empty() && first_step <= out.back().last_step) {
      auto& cur = out.back();
      if (last_step > cur.last_step) {
        cur.last_step = last_step;
        cur.t_end = steps[last_step]->t;
        cur.u_end = steps[last_step]->state_after.u;
      }
      continue;
    }
    out.push_back(ChatterInterval{steps[first_step]->t, steps[last_step]->t, steps[first_step]->state_after.u,
                                  steps[last_step]->state_after.u, first_step, last_step, 0});
  }

  for (auto& iv : out) {
    iv.toggles = static_cast<std::size_t>(std::count_if(
        toggles.begin(), toggles.end(), [&](std::size_t i) { return i >= iv.first_step && i <= iv.last_step; }));
  }
  return out;
}

std::string_view to_string(DeadlockExit e) noexcept {
  switch (e) {
    case DeadlockExit::tolerance:
      return "tolerance";
    case DeadlockExit::status_stabilized:
      return "status-stabilized";
    case DeadlockExit::unresolved:
      return "unresolved";
  }
  return "unresolved";
}

std::vector<DeadlockEpisode> detect_deadlock(const EventLog& log) {
  std::vector<DeadlockEpisode> out;
  const auto& recs = log.records;
  std::size_t i = 0;
  while (i < recs.size()) {
    if (recs[i].converged()) {
      ++i;
      continue;
    }
    DeadlockEpisode ep;
    ep.first_record = i;
    ep.t_start = recs[i].t_start;
    ep.t = recs[i].t;
    ep.u = recs[i].state_after.u;
    ep.first_h = recs[i].h_used;
    ep.exit_h = recs[i].h_used;
    ep.exit_u = recs[i].state_after.u;

    std::size_t j = i;
    while (j < recs.size() && !recs[j].converged() && recs[j].t_start == ep.t_start) {
      ++ep.attempts;
      ++j;
    }
    if (j < recs.size() && recs[j].converged() && recs[j].t_start == ep.t_start) {
      ep.exit_h = recs[j].h_used;
      ep.exit_u = recs[j].state_after.u;
      ep.exit_kind = recs[j].outcome == StepOutcome::converged_by_tolerance ? DeadlockExit::tolerance
                                                                            : DeadlockExit::status_stabilized;
      ++j;
    }
    out.push_back(ep);
    i = j;
  }
  return out;
}

}  // namespace awpi
