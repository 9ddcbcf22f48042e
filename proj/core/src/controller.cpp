#include "awpi/controller.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace awpi {

PiParams::PiParams(double kp, double ki, double w_min, double w_max)
    : kp_(kp), ki_(ki), w_min_(w_min), w_max_(w_max) {
  if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(w_min) || !std::isfinite(w_max)) {
    throw std::invalid_argument("PiParams: gains and limits must be finite");
  }
  if (kp < 0.0) {
    throw std::invalid_argument("PiParams: kp must be >= 0 (got " + std::to_string(kp) + ")");
  }
  if (ki < 0.0) {
    throw std::invalid_argument("PiParams: ki must be >= 0 (got " + std::to_string(ki) + ")");
  }
  if (!(w_min < w_max)) {
    throw std::invalid_argument("PiParams: w_min must be < w_max (got w_min=" + std::to_string(w_min) +
                                ", w_max=" + std::to_string(w_max) + ")");
  }
}

std::string_view to_string(LimitStatus s) noexcept {
  switch (s) {
    case LimitStatus::within:
      return "within";
    case LimitStatus::upper:
      return "upper";
    case LimitStatus::lower:
      return "lower";
  }
  return "within";
}

AlgebraicOutputs eval_algebraic(const PiParams& params, double x, double u, LimiterState limiter) noexcept {
  const double y = params.kp() * u + x;
  switch (limiter.status()) {
    case LimitStatus::upper:
      return {y, params.w_max()};
    case LimitStatus::lower:
      return {y, params.w_min()};
    case LimitStatus::within:
      break;
  }
  return {y, y};
}

double rate(const PiParams& params, double u, LimiterState limiter) noexcept {
  return limiter.z_i() ? params.ki() * u : 0.0;
}

LimiterState update_aw_status(const PiParams& params, double y) noexcept {
  if (y >= params.w_max()) return LimiterState::upper();
  if (y <= params.w_min()) return LimiterState::lower();
  return LimiterState::within();
}

bool is_consistent(const PiParams& params, const SimState& state) noexcept {
  if (state.w < params.w_min() || state.w > params.w_max()) return false;
  switch (state.limiter.status()) {
    case LimitStatus::upper:
      return state.w == params.w_max();
    case LimitStatus::lower:
      return state.w == params.w_min();
    case LimitStatus::within:
      return state.w == state.y;
  }
  return false;
}

}  // namespace awpi
