#pragma once

#include <functional>
#include <utility>
#include <variant>
#include <vector>

namespace gearnet {

/// Scalar function of time: a constant, a piecewise-linear table clamped at
/// its ends, or an arbitrary callable.
class TimeFunction {
 public:
  TimeFunction() = default;
  TimeFunction(double value);  // NOLINT(google-explicit-constructor): constants read naturally

  static TimeFunction constant(double value);
  /// Samples must have strictly increasing times.
  static TimeFunction piecewise_linear(std::vector<std::pair<double, double>> samples);
  static TimeFunction custom(std::function<double(double)> f);

  double operator()(double t) const;
  /// Exact for constants and tables (one-sided slope at knots, zero outside);
  /// central difference for callables.
  double derivative(double t) const;

  bool is_constant() const noexcept { return kind_ == Kind::constant; }
  double constant_value() const noexcept { return value_; }
  const std::vector<std::pair<double, double>>& samples() const noexcept { return samples_; }
  bool is_table() const noexcept { return kind_ == Kind::table; }

 private:
  enum class Kind { constant, table, custom };
  Kind kind_ = Kind::constant;
  double value_ = 0.0;
  std::vector<std::pair<double, double>> samples_;
  std::function<double(double)> custom_;
};

struct Free {};
/// Torque -b * omega.
struct Viscous {
  double b = 0.0;
};
/// Torque -tau_r * tanh(omega / omega_eps): a smoothed constant resistance.
struct ConstantResistive {
  double tau_r = 0.0;
};
/// Shaft velocity pinned to zero.
struct Locked {};
/// Prescribed external torque tau(t).
struct AppliedTorque {
  TimeFunction tau;
};

using Load = std::variant<Free, Viscous, ConstantResistive, Locked, AppliedTorque>;

struct EffortSource {
  TimeFunction tau;
};
/// Shaft velocity prescribed exactly at every instant.
struct FlowSource {
  TimeFunction omega;
};

using Source = std::variant<EffortSource, FlowSource>;

}  // namespace gearnet
