#include "awpi/integrators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace awpi {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::epm:
      return "epm";
    case Method::elm:
      return "elm";
    case Method::itm:
      return "itm";
  }
  return "epm";
}

Method method_from_string(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "epm") return Method::epm;
  if (lower == "elm") return Method::elm;
  if (lower == "itm") return Method::itm;
  throw std::invalid_argument("unknown method '" + std::string(s) + "' (expected epm, elm or itm)");
}

std::string_view to_string(StepOutcome o) noexcept {
  switch (o) {
    case StepOutcome::converged:
      return "converged";
    case StepOutcome::converged_by_tolerance:
      return "converged-by-tolerance";
    case StepOutcome::not_converged:
      return "not-converged";
  }
  return "converged";
}

void ItmSettings::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("ItmSettings: epsilon must be > 0");
  if (n_iter_max < 2) throw std::invalid_argument("ItmSettings: n_iter_max must be >= 2");
  if (!(h_min_floor > 0.0)) throw std::invalid_argument("ItmSettings: h_min_floor must be > 0");
  if (!(h_min_floor <= h_init)) throw std::invalid_argument("ItmSettings: h_min_floor must be <= h_init");
  if (!(h_init <= h_cap)) throw std::invalid_argument("ItmSettings: h_init must be <= h_cap");
  if (!(h_delta >= 0.0)) throw std::invalid_argument("ItmSettings: h_delta must be >= 0");
}

StepRecord step_epm(const PiParams& params, const SimState& prev, double u_next, double h) {
  // Algebraic part first with the old state; the new x shows up in y one
  // step later.
  const double y_next = params.kp() * u_next + prev.x;
  const LimiterState limiter = update_aw_status(params, y_next);
  const auto [y, w] = eval_algebraic(params, prev.x, u_next, limiter);
  const double x_next = prev.x + h * rate(params, u_next, limiter);

  StepRecord rec;
  rec.t_start = prev.t;
  rec.t = prev.t + h;
  rec.h_used = h;
  rec.state_after = SimState{rec.t, x_next, y, w, u_next, limiter};
  rec.limiter_before = prev.limiter;
  rec.limiter_after = limiter;
  rec.n_iterations = 1;
  rec.outcome = StepOutcome::converged;
  return rec;
}

StepRecord step_elm(const PiParams& params, const SimState& prev, double u_next, double h) {
  const double x_next = prev.x + h * rate(params, u_next, prev.limiter);
  const LimiterState limiter = update_aw_status(params, params.kp() * u_next + x_next);
  const auto [y, w] = eval_algebraic(params, x_next, u_next, limiter);

  StepRecord rec;
  rec.t_start = prev.t;
  rec.t = prev.t + h;
  rec.h_used = h;
  rec.state_after = SimState{rec.t, x_next, y, w, u_next, limiter};
  rec.limiter_before = prev.limiter;
  rec.limiter_after = limiter;
  rec.n_iterations = 1;
  rec.outcome = StepOutcome::converged;
  return rec;
}

StepRecord step_itm(const PiParams& params, const SimState& prev, double u_next, double h,
                    const ItmSettings& settings) {
  const double rate_prev = rate(params, prev.u, prev.limiter);

  StepRecord rec;
  rec.t_start = prev.t;
  rec.t = prev.t + h;
  rec.h_used = h;
  rec.limiter_before = prev.limiter;
  rec.iteration_trace.reserve(static_cast<std::size_t>(settings.n_iter_max));

  double x = prev.x;
  double y = prev.y;
  double w = prev.w;
  LimiterState status = update_aw_status(params, params.kp() * u_next + prev.x);

  for (int i = 0; i < settings.n_iter_max; ++i) {
    // Each branch of the conditional equation set is linear, so one solve
    // per pass is exact for the status it was given.
    const double x_new = prev.x + 0.5 * h * (rate(params, u_next, status) + rate_prev);
    const auto [y_new, w_new] = eval_algebraic(params, x_new, u_next, status);
    const double increment = std::max({std::abs(x_new - x), std::abs(y_new - y), std::abs(w_new - w)});
    const LimiterState post = update_aw_status(params, y_new);
    rec.iteration_trace.push_back(IterationSample{status, x_new, y_new, w_new, increment, post});
    x = x_new;
    y = y_new;
    w = w_new;

    if (increment < settings.epsilon) {
      rec.n_iterations = i + 1;
      rec.outcome = post == status ? StepOutcome::converged : StepOutcome::converged_by_tolerance;
      rec.limiter_after = post;
      rec.state_after = SimState{rec.t, x, y, eval_algebraic(params, x, u_next, post).w, u_next, post};
      return rec;
    }
    status = post;
  }

  rec.n_iterations = settings.n_iter_max;
  rec.outcome = StepOutcome::not_converged;
  rec.limiter_after = status;
  rec.state_after = SimState{rec.t, x, y, eval_algebraic(params, x, u_next, status).w, u_next, status};
  return rec;
}

double adapt_step(double h, int n_last, const ItmSettings& settings) noexcept {
  double next = h;
  if (n_last <= 3) {
    next = h + settings.h_delta;
  } else if (n_last >= 15) {
    next = h - settings.h_delta;
  }
  return std::clamp(next, settings.h_min_floor, settings.h_cap);
}

SimState initialize(const PiParams& params, const SignalSpec& signal, double initial_output, double t0) {
  if (!std::isfinite(initial_output) || initial_output < params.w_min() || initial_output > params.w_max()) {
    throw std::invalid_argument("initial_output " + std::to_string(initial_output) + " lies outside [w_min, w_max] = [" +
                                std::to_string(params.w_min()) + ", " + std::to_string(params.w_max()) + "]");
  }
  const double u0 = sample(signal, t0);
  const double x0 = initial_output - params.kp() * u0;
  const LimiterState limiter = update_aw_status(params, initial_output);
  const auto [y, w] = eval_algebraic(params, x0, u0, limiter);
  return SimState{t0, x0, y, w, u0, limiter};
}

std::vector<const StepRecord*> EventLog::accepted() const {
  std::vector<const StepRecord*> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (r.converged()) out.push_back(&r);
  }
  return out;
}

}  // namespace awpi
