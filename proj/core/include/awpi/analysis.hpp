#pragma once

// Closed-form predictors for when chattering stops (EPM/ELM) and for the
// step sizes that avoid or exit an ITM deadlock, plus detectors that find
// chattering intervals and deadlock episodes in simulation logs.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "awpi/controller.hpp"
#include "awpi/integrators.hpp"

namespace awpi {

/// Returned by bounds that do not exist (e.g. zero input or zero ki).
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// How the integrator sum in the chatter-free condition is read.
///   cumulative: sum of (u_{t+ih} - u_t), i.e. i*du for a constant ramp
///   literal:    sum of k*du_{t+ih}, exactly as the formula is printed
enum class SummandReading : std::uint8_t { cumulative, literal };

struct ChatterPrediction {
  Method method{Method::epm};
  SummandReading reading{SummandReading::cumulative};
  int k_max{10};
  double threshold_u{kUnbounded};  ///< min over k of the per-k bounds
  int binding_k{1};
  std::vector<std::pair<int, double>> per_k_thresholds;
  /// Whether an unlock at the reference input stays unlocked for k_max steps.
  std::optional<bool> stays_unlocked_at_ref;
};

/// Constant decrement du_per_step (< 0) per step of size h. Throws
/// std::invalid_argument for du_per_step >= 0, h <= 0 or k_max < 1.
ChatterPrediction chattering_threshold_epm(const PiParams& params, double h, double du_per_step,
                                           std::optional<double> u_ref = std::nullopt, int k_max = 10,
                                           SummandReading reading = SummandReading::cumulative);

ChatterPrediction chattering_threshold_elm(const PiParams& params, double h, double du_per_step,
                                           std::optional<double> u_ref = std::nullopt, int k_max = 10,
                                           SummandReading reading = SummandReading::cumulative);

/// General form over a supplied increment sequence: increments[i] is the
/// input change into step t+ih, i = 0..k_max (increments[0] is the change
/// that unlocked the integrator). Method must be EPM or ELM.
ChatterPrediction chattering_threshold(Method method, const PiParams& params, double h,
                                       std::span<const double> increments, std::optional<double> u_ref = std::nullopt,
                                       SummandReading reading = SummandReading::cumulative);

/// Largest step that keeps the integrator unlocked when the input moves by
/// du_t over the step: h < -(2 kp / ki) (du_t / u_t). Requires u_t > 0 and
/// du_t <= 0.
double min_step_avoid_deadlock_discrete(const PiParams& params, double u_t, double du_t);

/// Differentiable-input bound h > -2 kp/ki - 2 u_prev / (udot_t + udot_prev).
/// Requires udot_t + udot_prev < 0.
double min_step_avoid_deadlock_differentiable(const PiParams& params, double u_prev, double udot_t,
                                              double udot_prev);

/// 2 epsilon / (ki |u_t|); kUnbounded when u_t == 0 or ki == 0.
double max_step_exit_deadlock(const PiParams& params, double u_t, double epsilon);

struct DeadlockBounds {
  double h_min_avoid{0.0};       ///< differentiable-input minimum step
  double h_max_exit{kUnbounded};  ///< largest step that exits under epsilon
  double h_avoid_discrete{0.0};  ///< discrete-increment form
};

DeadlockBounds deadlock_bounds(const PiParams& params, double u_ref, double udot, double h, double epsilon);

struct LimiterEvent {
  std::size_t record_index{0};
  double t{0.0};
  double u{0.0};
  LimiterState from{};
  LimiterState to{};
};

/// Status changes across accepted steps, in order.
std::vector<LimiterEvent> limiter_events(const EventLog& log);

struct ChatterStop {
  std::optional<double> last_relock_u;         ///< input at the final return to the same limit
  std::optional<double> last_failed_unlock_u;  ///< input at the unlock that preceded it
  std::optional<double> final_unlock_u;        ///< input at the unlock that stayed unlocked
  std::size_t relocks{0};
};

/// Relocking = leaving a limit and returning to the same limit.
ChatterStop summarize_chatter_stop(const EventLog& log);

struct ChatterInterval {
  double t_begin{0.0};
  double t_end{0.0};
  double u_begin{0.0};
  double u_end{0.0};
  std::size_t first_step{0};  ///< index into accepted steps
  std::size_t last_step{0};
  std::size_t toggles{0};
};

std::vector<ChatterInterval> detect_chattering(const EventLog& log, int window = 10, int min_toggles = 2);

enum class DeadlockExit : std::uint8_t { tolerance, status_stabilized, unresolved };

std::string_view to_string(DeadlockExit e) noexcept;

struct DeadlockEpisode {
  double t_start{0.0};  ///< simulation time the failing step starts from
  double t{0.0};        ///< time the first failing attempt solved for
  double u{0.0};        ///< input of the first failing attempt
  std::size_t attempts{0};
  double first_h{0.0};
  double exit_h{0.0};  ///< step size of the attempt that ended the episode
  double exit_u{0.0};
  DeadlockExit exit_kind{DeadlockExit::unresolved};
  std::size_t first_record{0};
};

std::vector<DeadlockEpisode> detect_deadlock(const EventLog& log);

}  // namespace awpi
