#pragma once

// PI controller with a conditional anti-windup integrator and hard output
// limiter, written as the DAE
//
//   xdot = z_i * ki * u
//   0    = (kp * u + x) - y
//   0    = (z_i * y + z_l * w_min + z_u * w_max) - w
//
// The functions here are the only place the two conditional equation sets
// are evaluated; every integrator goes through them.

#include <cstdint>
#include <string_view>

namespace awpi {

class PiParams {
 public:
  /// Throws std::invalid_argument unless kp >= 0, ki >= 0 and w_min < w_max.
  PiParams(double kp, double ki, double w_min, double w_max);

  double kp() const noexcept { return kp_; }
  double ki() const noexcept { return ki_; }
  double w_min() const noexcept { return w_min_; }
  double w_max() const noexcept { return w_max_; }

  friend bool operator==(const PiParams&, const PiParams&) = default;

 private:
  double kp_;
  double ki_;
  double w_min_;
  double w_max_;
};

enum class LimitStatus : std::uint8_t { within, upper, lower };

std::string_view to_string(LimitStatus s) noexcept;

/// One-hot (z_i, z_u, z_l). Holding a single enum makes the one-hot
/// property structural.
class LimiterState {
 public:
  constexpr LimiterState() noexcept = default;
  constexpr explicit LimiterState(LimitStatus s) noexcept : status_(s) {}

  static constexpr LimiterState within() noexcept { return LimiterState{LimitStatus::within}; }
  static constexpr LimiterState upper() noexcept { return LimiterState{LimitStatus::upper}; }
  static constexpr LimiterState lower() noexcept { return LimiterState{LimitStatus::lower}; }

  constexpr LimitStatus status() const noexcept { return status_; }
  constexpr int z_i() const noexcept { return status_ == LimitStatus::within ? 1 : 0; }
  constexpr int z_u() const noexcept { return status_ == LimitStatus::upper ? 1 : 0; }
  constexpr int z_l() const noexcept { return status_ == LimitStatus::lower ? 1 : 0; }
  constexpr bool limited() const noexcept { return status_ != LimitStatus::within; }

  friend constexpr bool operator==(LimiterState, LimiterState) = default;

 private:
  LimitStatus status_{LimitStatus::within};
};

struct SimState {
  double t{0.0};
  double x{0.0};  ///< integrator state
  double y{0.0};  ///< pre-limit output
  double w{0.0};  ///< post-limit output
  double u{0.0};  ///< input at t
  LimiterState limiter{};

  friend bool operator==(const SimState&, const SimState&) = default;
};

struct AlgebraicOutputs {
  double y;
  double w;
};

AlgebraicOutputs eval_algebraic(const PiParams& params, double x, double u, LimiterState limiter) noexcept;

/// Integrator derivative; zero unless the integrator is within limits.
double rate(const PiParams& params, double u, LimiterState limiter) noexcept;

/// y >= w_max locks high, y <= w_min locks low. Equality counts as limited.
LimiterState update_aw_status(const PiParams& params, double y) noexcept;

/// True when w lies in [w_min, w_max] and agrees with the limiter flags.
bool is_consistent(const PiParams& params, const SimState& state) noexcept;

}  // namespace awpi
