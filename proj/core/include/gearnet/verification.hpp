#pragma once

// Residual checks of the closed-form gear relations over a recorded
// trajectory. Torque symbols follow the power-flow reading of each relation:
//   tau_i       torque the input delivers into the worms, sum of -f(Wn.worm)
//   tau_Rn      f(Wn.wheel) for n = 1..3, f(Dn.ring) for n = 4..6
//   tau_s       f(Dn.side) for the first-stage sides S1..S6,
//               -f(Dn.side) for the second-stage sides S7..S12
//   tau_On      f(Jn.b)
// where f(E.p) is the torque element E applies to the shaft on port p.
// The relative residual of a sample is |r| / max(1, scale) with scale the
// largest magnitude among the terms of the relation.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gearnet/dynamics.hpp"

namespace gearnet {

inline constexpr double kKinematicTolerance = 1e-8;
inline constexpr double kTorqueTolerance = 1e-6;
inline constexpr double kKktTolerance = 1e-9;
inline constexpr double kElementPowerTolerance = 1e-12;

struct VerificationContext {
  std::string family;
  double k = 20.0;
  double j = 2.0;
  std::string drive = "unknown";
  bool input_locked = false;
  /// Identical loads on all outputs and nothing else acting on the mechanism.
  bool equal_loads = false;
  double kinematic_tolerance = kKinematicTolerance;
  double torque_tolerance = kTorqueTolerance;
};

/// Derives family, ratios and the conditional-check switches from a scenario.
VerificationContext context_for(const Scenario& scenario);
/// Same without scenario metadata: no conditional checks are enabled.
VerificationContext context_for(const MechanismGraph& graph);

struct CheckResult {
  std::string check;
  /// ASCII form of the relation being checked.
  std::string anchor_quote;
  bool needs_torques = false;
  double tolerance = 0.0;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
  std::size_t worst_step = 0;
  double worst_time = 0.0;
  std::size_t samples = 0;
  /// Power balance only: worst-case contribution of epsilon inertias.
  std::optional<double> epsilon_bound;
  bool pass = true;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  const CheckResult* find(std::string_view check) const;
};

/// Names of the checks registered for the graph's family whose conditions
/// hold under the context, in evaluation order.
std::vector<std::string> registered_checks(const MechanismGraph& graph, const VerificationContext& context,
                                           bool with_torques = true);

/// Evaluates the registered checks, or only those named in selection.
/// Without a selection, torque checks are skipped when the trajectory has no
/// torques; a selection naming a torque check then raises MissingTorqueError.
/// An empty trajectory yields an empty report.
VerificationReport check_invariants(const Trajectory& trajectory, const MechanismGraph& graph,
                                    const VerificationContext& context,
                                    const std::optional<std::vector<std::string>>& selection = std::nullopt);

struct PowerBalance {
  /// Source power + load power - d/dt kinetic energy, per sample, using the
  /// graph's physical inertias.
  std::vector<double> residual;
  /// Per-sample magnitude of the epsilon-inertia contribution, sum |eps v a|.
  std::vector<double> epsilon_bound;
  std::vector<double> source_power;
  std::vector<double> load_power;
  /// Largest term magnitude per sample, used for relative residuals.
  std::vector<double> scale;
};

/// Requires torques (MissingTorqueError otherwise).
PowerBalance power_balance(const Trajectory& trajectory, const MechanismGraph& graph);

/// JSON array of {check, anchor_quote, max_rel_residual, pass, ...}.
std::string report_json(const VerificationReport& report);

}  // namespace gearnet
