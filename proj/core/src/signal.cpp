#include "awpi/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace awpi {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate(const ConstantSignal& c) {
  if (!std::isfinite(c.value)) throw std::invalid_argument("constant signal: value must be finite");
}

void validate(const TriangularRamp& r) {
  if (!std::isfinite(r.u0) || !std::isfinite(r.t_down) || !std::isfinite(r.t_up) || !std::isfinite(r.slope)) {
    throw std::invalid_argument("triangular-ramp signal: parameters must be finite");
  }
  if (r.t_down < 0.0) throw std::invalid_argument("triangular-ramp signal: t_down must be >= 0");
  if (!(r.t_down < r.t_up)) throw std::invalid_argument("triangular-ramp signal: t_down must be < t_up");
  if (r.slope < 0.0) throw std::invalid_argument("triangular-ramp signal: slope is a magnitude and must be >= 0");
}

void validate(const PiecewiseLinear& p) {
  if (p.points.empty()) throw std::invalid_argument("piecewise-linear signal: needs at least one breakpoint");
  for (const auto& [t, u] : p.points) {
    if (!std::isfinite(t) || !std::isfinite(u)) {
      throw std::invalid_argument("piecewise-linear signal: breakpoints must be finite");
    }
  }
  for (std::size_t i = 1; i < p.points.size(); ++i) {
    if (!(p.points[i - 1].first < p.points[i].first)) {
      throw std::invalid_argument("piecewise-linear signal: breakpoint times must be strictly increasing");
    }
  }
}

}  // namespace

SignalSpec::SignalSpec(Variant v) : v_(std::move(v)) {
  std::visit([](const auto& s) { validate(s); }, v_);
}

std::string_view SignalSpec::kind() const noexcept {
  return std::visit(overloaded{
                        [](const ConstantSignal&) { return std::string_view{"constant"}; },
                        [](const TriangularRamp&) { return std::string_view{"triangular-ramp"}; },
                        [](const PiecewiseLinear&) { return std::string_view{"piecewise-linear"}; },
                    },
                    v_);
}

double SignalSpec::max_slope() const noexcept {
  return std::visit(overloaded{
                        [](const ConstantSignal&) { return 0.0; },
                        [](const TriangularRamp& r) { return r.slope; },
                        [](const PiecewiseLinear& p) {
                          double m = 0.0;
                          for (std::size_t i = 1; i < p.points.size(); ++i) {
                            const auto& [t0, u0] = p.points[i - 1];
                            const auto& [t1, u1] = p.points[i];
                            m = std::max(m, std::abs((u1 - u0) / (t1 - t0)));
                          }
                          return m;
                        },
                    },
                    v_);
}

double sample(const SignalSpec& spec, double t) {
  return std::visit(overloaded{
                        [](const ConstantSignal& c) { return c.value; },
                        [t](const TriangularRamp& r) {
                          const double peak = r.u0 + r.slope * r.t_down;
                          if (t <= r.t_down) return r.u0 + r.slope * t;
                          if (t <= r.t_up) return peak - r.slope * (t - r.t_down);
                          const double trough = peak - r.slope * (r.t_up - r.t_down);
                          return trough + r.slope * (t - r.t_up);
                        },
                        [t](const PiecewiseLinear& p) {
                          const auto& pts = p.points;
                          if (t <= pts.front().first) return pts.front().second;
                          if (t >= pts.back().first) return pts.back().second;
                          auto hi = std::upper_bound(pts.begin(), pts.end(), t,
                                                     [](double v, const auto& pt) { return v < pt.first; });
                          auto lo = std::prev(hi);
                          const double frac = (t - lo->first) / (hi->first - lo->first);
                          return lo->second + frac * (hi->second - lo->second);
                        },
                    },
                    spec.get());
}

double derivative(const SignalSpec& spec, double t) {
  return std::visit(overloaded{
                        [](const ConstantSignal&) { return 0.0; },
                        [t](const TriangularRamp& r) {
                          if (t < r.t_down) return r.slope;
                          if (t < r.t_up) return -r.slope;
                          return r.slope;
                        },
                        [t](const PiecewiseLinear& p) {
                          const auto& pts = p.points;
                          if (t < pts.front().first || t >= pts.back().first) return 0.0;
                          auto hi = std::upper_bound(pts.begin(), pts.end(), t,
                                                     [](double v, const auto& pt) { return v < pt.first; });
                          auto lo = std::prev(hi);
                          return (hi->second - lo->second) / (hi->first - lo->first);
                        },
                    },
                    spec.get());
}

}  // namespace awpi
