#pragma once

// Forward Euler for the PI integrator with the limiter assumed inactive.
// Self-contained: no library code, its own interpolation.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace awpi::oracle {

inline double interp(const std::vector<std::pair<double, double>>& pts, double t) {
  if (t <= pts.front().first) return pts.front().second;
  if (t >= pts.back().first) return pts.back().second;
  std::size_t i = 1;
  while (pts[i].first < t) ++i;
  const auto [t0, u0] = pts[i - 1];
  const auto [t1, u1] = pts[i];
  return u0 + (u1 - u0) * (t - t0) / (t1 - t0);
}

struct EulerResult {
  double x_end;
  double y_min;
  double y_max;
};

/// x(0) = y0 - kp*u(0); x' = ki*u(t). Tracks the range of y so callers can
/// confirm the limiter never engaged.
inline EulerResult euler_reference(double kp, double ki, double y0, const std::vector<std::pair<double, double>>& pts,
                                   double t_end, double h) {
  if (!(h > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("euler_reference: bad step or horizon");
  const auto n = static_cast<long long>(std::llround(t_end / h));
  double x = y0 - kp * interp(pts, 0.0);
  double y_min = y0;
  double y_max = y0;
  for (long long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * h;
    x += h * ki * interp(pts, t);
    const double y = kp * interp(pts, t + h) + x;
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  }
  return {x, y_min, y_max};
}

}  // namespace awpi::oracle
