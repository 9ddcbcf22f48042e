#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "awpi/integrators.hpp"

namespace awpi {

void ScenarioConfig::validate() const {
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_start < t_end)) {
    throw std::invalid_argument("scenario: t_start must be < t_end");
  }
  if (t_start < 0.0) throw std::invalid_argument("scenario: t_start must be >= 0");
  if (method == Method::itm) {
    itm.validate();
  } else if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("scenario: step h must be > 0");
  }
  if (max_stalled_attempts < 1) throw std::invalid_argument("scenario: max_stalled_attempts must be >= 1");
  if (analysis.k_max < 1) throw std::invalid_argument("scenario: analysis.k_max must be >= 1");
  if (initial_output < params.w_min() || initial_output > params.w_max()) {
    throw std::invalid_argument("scenario: initial_output must lie within [w_min, w_max]");
  }
}

namespace {

EventLog march_fixed(const ScenarioConfig& cfg) {
  EventLog log;
  log.method = cfg.method;
  log.initial = initialize(cfg.params, cfg.signal, cfg.initial_output, cfg.t_start);

  const double span = cfg.t_end - cfg.t_start;
  const auto n_steps = static_cast<long long>(std::ceil(span / cfg.h - 1e-9));
  log.records.reserve(static_cast<std::size_t>(n_steps));

  SimState state = log.initial;
  for (long long k = 1; k <= n_steps; ++k) {
    // Grid points are computed, not accumulated, so EPM and ELM see the same
    // inputs bit for bit.
    const double t_next = k == n_steps ? cfg.t_end : cfg.t_start + static_cast<double>(k) * cfg.h;
    const double h = k == n_steps ? cfg.t_end - state.t : cfg.h;
    const double u_next = sample(cfg.signal, t_next);
    StepRecord rec = cfg.method == Method::epm ? step_epm(cfg.params, state, u_next, h)
                                               : step_elm(cfg.params, state, u_next, h);
    rec.t = t_next;
    rec.state_after.t = t_next;
    state = rec.state_after;
    log.records.push_back(std::move(rec));
  }
  return log;
}

EventLog march_itm(const ScenarioConfig& cfg) {
  const ItmSettings& s = cfg.itm;
  EventLog log;
  log.method = Method::itm;
  log.initial = initialize(cfg.params, cfg.signal, cfg.initial_output, cfg.t_start);

  SimState state = log.initial;
  double h = s.h_init;
  int stalled = 0;
  const double t_eps = 1e-12 * std::max(1.0, std::abs(cfg.t_end));

  while (state.t < cfg.t_end - t_eps) {
    const double h_try = std::min(h, cfg.t_end - state.t);
    const double u_next = sample(cfg.signal, state.t + h_try);
    StepRecord rec = step_itm(cfg.params, state, u_next, h_try, s);
    const double h_next = adapt_step(h, rec.n_iterations, s);

    if (!rec.converged()) {
      stalled = h_next < h ? 0 : stalled + 1;
      log.records.push_back(std::move(rec));
      if (stalled > cfg.max_stalled_attempts) {
        throw SimulationAborted(fmt::format("ITM cannot converge at t = {:.12g} s: {} consecutive failed attempts "
                                            "without a smaller step (h = {:.6g} s, floor {:.6g} s)",
                                            state.t, stalled, h, s.h_min_floor),
                                std::move(log));
      }
      h = h_next;
      continue;
    }

    stalled = 0;
    state = rec.state_after;
    if (!cfg.keep_all_traces && rec.outcome == StepOutcome::converged) rec.iteration_trace.clear();
    log.records.push_back(std::move(rec));
    h = h_next;
  }
  return log;
}

}  // namespace

EventLog simulate(const ScenarioConfig& config) {
  config.validate();
  return config.method == Method::itm ? march_itm(config) : march_fixed(config);
}

}  // namespace awpi
