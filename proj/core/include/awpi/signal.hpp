#pragma once

#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace awpi {

struct ConstantSignal {
  double value{0.0};
  friend bool operator==(const ConstantSignal&, const ConstantSignal&) = default;
};

/// Rises with +slope until t_down, falls with -slope until t_up, then rises
/// again: the input used to push the controller into and out of saturation.
struct TriangularRamp {
  double u0{0.0};
  double t_down{2.0};
  double t_up{6.0};
  double slope{1.0};
  friend bool operator==(const TriangularRamp&, const TriangularRamp&) = default;
};

/// Linear interpolation between (t, u) breakpoints; held constant outside.
struct PiecewiseLinear {
  std::vector<std::pair<double, double>> points;
  friend bool operator==(const PiecewiseLinear&, const PiecewiseLinear&) = default;
};

class SignalSpec {
 public:
  using Variant = std::variant<ConstantSignal, TriangularRamp, PiecewiseLinear>;

  SignalSpec() = default;
  /// Throws std::invalid_argument on non-finite values, t_down >= t_up,
  /// negative slope, or breakpoints that are not strictly increasing.
  SignalSpec(Variant v);

  const Variant& get() const noexcept { return v_; }
  std::string_view kind() const noexcept;

  /// Largest |du/dt| over all segments.
  double max_slope() const noexcept;

  friend bool operator==(const SignalSpec&, const SignalSpec&) = default;

 private:
  Variant v_{ConstantSignal{}};
};

double sample(const SignalSpec& spec, double t);

/// Right-hand derivative at breakpoints.
double derivative(const SignalSpec& spec, double t);

}  // namespace awpi
