#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "awpi/controller.hpp"
#include "awpi/signal.hpp"

namespace awpi {

/// EPM: algebraic solve with the old state, then explicit (forward Euler)
/// integration. ELM: execution-list order, integrator gated by the previous
/// step's status. ITM: implicit trapezoidal with an inner iteration loop.
enum class Method : std::uint8_t { epm, elm, itm };

std::string_view to_string(Method m) noexcept;
/// Accepts "epm", "elm", "itm" (case-insensitive). Throws std::invalid_argument.
Method method_from_string(std::string_view s);

enum class StepOutcome : std::uint8_t {
  converged,               ///< increment < epsilon and status unchanged
  converged_by_tolerance,  ///< increment < epsilon while the status still toggled
  not_converged,           ///< iteration budget exhausted
};

std::string_view to_string(StepOutcome o) noexcept;

/// One pass of the ITM inner loop: the status the equations were solved
/// with, the solution, its max-norm increment and the status re-evaluated
/// from the fresh y.
struct IterationSample {
  LimiterState status_in;
  double x;
  double y;
  double w;
  double increment;
  LimiterState status_out;
};

struct StepRecord {
  double t_start{0.0};  ///< time the step starts from
  double t{0.0};        ///< time solved for, t_start + h_used
  double h_used{0.0};
  SimState state_after{};
  LimiterState limiter_before{};
  LimiterState limiter_after{};
  int n_iterations{1};
  StepOutcome outcome{StepOutcome::converged};
  std::vector<IterationSample> iteration_trace;

  bool converged() const noexcept { return outcome != StepOutcome::not_converged; }
  bool toggled() const noexcept { return converged() && limiter_before != limiter_after; }
};

struct ItmSettings {
  double epsilon{1e-3};
  int n_iter_max{20};
  double h_init{1e-3};
  double h_min_floor{1e-5};
  double h_cap{1e-3};
  double h_delta{1e-6};

  /// Throws std::invalid_argument naming the violated bound.
  void validate() const;

  friend bool operator==(const ItmSettings&, const ItmSettings&) = default;
};

StepRecord step_epm(const PiParams& params, const SimState& prev, double u_next, double h);

StepRecord step_elm(const PiParams& params, const SimState& prev, double u_next, double h);

/// One trapezoidal step. The limiter status is refreshed from the limiter
/// input kp*u_next + x_prev before the first pass; after every pass it is
/// re-evaluated from the new y. The stored derivative of the previous
/// accepted step is rate(params, prev.u, prev.limiter).
StepRecord step_itm(const PiParams& params, const SimState& prev, double u_next, double h,
                    const ItmSettings& settings);

/// Step-size heuristic: grow by h_delta after an easy step (<= 3 passes),
/// shrink by h_delta after a hard one (>= 15), clamp to [h_min_floor, h_cap].
double adapt_step(double h, int n_last, const ItmSettings& settings) noexcept;

/// Sets x so that kp*u(t0) + x equals `initial_output`.
/// Throws std::invalid_argument if the output lies outside [w_min, w_max].
SimState initialize(const PiParams& params, const SignalSpec& signal, double initial_output, double t0 = 0.0);

struct AnalysisHints {
  int k_max{10};
  std::optional<double> t_ref;  ///< time of the unlock the predictors refer to

  friend bool operator==(const AnalysisHints&, const AnalysisHints&) = default;
};

struct ScenarioConfig {
  std::string name;
  PiParams params;
  SignalSpec signal;
  Method method{Method::epm};
  double initial_output{0.0};
  double t_start{0.0};
  double t_end{1.0};
  double h{1e-3};  ///< fixed step for EPM/ELM
  ItmSettings itm{};
  int max_stalled_attempts{100};
  bool keep_all_traces{false};
  AnalysisHints analysis{};

  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;

  /// Step size the chattering predictors should assume.
  double nominal_step() const noexcept { return method == Method::itm ? itm.h_init : h; }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct EventLog {
  Method method{Method::epm};
  SimState initial{};
  std::vector<StepRecord> records;  ///< every attempt, in order

  std::vector<const StepRecord*> accepted() const;
};

/// Thrown when the ITM cannot make progress; carries the log up to the abort.
class SimulationAborted : public std::runtime_error {
 public:
  SimulationAborted(const std::string& what, EventLog partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const EventLog& partial_log() const noexcept { return partial_; }

 private:
  EventLog partial_;
};

/// Fixed-step march for EPM/ELM. For ITM the step size follows adapt_step
/// and a failed step is retried at the same time with the adapted size.
EventLog simulate(const ScenarioConfig& config);

}  // namespace awpi
