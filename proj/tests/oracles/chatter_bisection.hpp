#pragma once

// Brute-force unlock threshold: start exactly on w_max, apply the input
// sequence step by step with the real EPM/ELM step functions and bisect on
// the input at the unlock step for the largest value that never relocks.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "awpi/integrators.hpp"

namespace awpi::oracle {

/// increments[0] unlocks; increments[1..k_max] follow.
inline bool stays_unlocked(Method m, const PiParams& p, double h, const std::vector<double>& increments, double u_t) {
  SimState s;
  s.u = u_t - increments.front();
  s.x = p.w_max() - p.kp() * s.u;
  s.y = p.w_max();
  s.w = p.w_max();
  s.limiter = LimiterState::upper();

  double u = u_t;
  for (std::size_t k = 0; k < increments.size(); ++k) {
    if (k > 0) u += increments[k];
    const StepRecord r = m == Method::epm ? step_epm(p, s, u, h) : step_elm(p, s, u, h);
    s = r.state_after;
    if (k == 0 && s.limiter.limited()) throw std::logic_error("stays_unlocked: first step did not unlock");
    if (k > 0 && s.limiter == LimiterState::upper()) return false;
  }
  return true;
}

inline double bisect_threshold(Method m, const PiParams& p, double h, const std::vector<double>& increments,
                               double lo = 0.0, double hi = 1.0, int iterations = 80) {
  if (!stays_unlocked(m, p, h, increments, lo) || stays_unlocked(m, p, h, increments, hi)) {
    throw std::invalid_argument("bisect_threshold: bracket does not straddle the threshold");
  }
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    (stays_unlocked(m, p, h, increments, mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace awpi::oracle
