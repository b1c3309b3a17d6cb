#pragma once

// Constrained rigid-shaft dynamics. With M the diagonal shaft inertia
// matrix (massless shafts get epsilon_inertia) and C the element constraint
// rows, each solve finds accelerations alpha and multipliers lambda with
//
//   M alpha - C^T lambda = tau_ext(omega, t)
//   C alpha             = 0
//
// plus one pinning row alpha_d = d/dt omega_d for every velocity-prescribed
// shaft (flow sources, locked loads, a locked input). Element port torques
// are coefficient * lambda, i.e. the transpose of the velocity row.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "gearnet/loads.hpp"
#include "gearnet/mechanism.hpp"

namespace gearnet {

inline constexpr double kDefaultEpsilonInertia = 1e-8;
/// Velocity scale of the tanh regularization used by ConstantResistive.
inline constexpr double kResistiveVelocityScale = 1e-4;
inline constexpr double kDefaultTimestep = 1e-4;

/// Effort source on the input shaft.
struct TorqueDriven {
  ShaftId input;
  TimeFunction tau_e;
};

/// Flow source on the input shaft.
struct VelocityDriven {
  ShaftId input;
  TimeFunction omega;
};

/// Self-locked worm regime: the input is pinned to zero velocity and the
/// mechanism is driven from elsewhere (sources or applied torques).
struct InputLocked {
  ShaftId input;
};

using DriveMode = std::variant<TorqueDriven, VelocityDriven, InputLocked>;

ShaftId drive_shaft(const DriveMode& drive);
std::string_view drive_name(const DriveMode& drive);

enum class Integrator { semi_implicit_euler, rk4 };

std::string_view to_string(Integrator integrator);

struct Scenario {
  std::shared_ptr<const MechanismGraph> graph;
  DriveMode drive;
  std::map<ShaftId, Load> loads;
  /// Sources in addition to the drive.
  std::map<ShaftId, Source> sources;
  /// Starting velocities; unset shafts start at zero. The start state is
  /// projected onto the constraints in the inertia metric.
  std::map<ShaftId, double> initial_velocity;
  double duration = 1.0;
  double timestep = kDefaultTimestep;
  double epsilon_inertia = kDefaultEpsilonInertia;
  bool record_torques = true;
  Integrator integrator = Integrator::semi_implicit_euler;
};

/// Throws PreconditionError naming the first violated requirement.
void validate(const Scenario& scenario);

/// Inertias with epsilon substituted for massless shafts.
Eigen::VectorXd effective_inertia(const MechanismGraph& graph, double epsilon_inertia);

/// Saddle-point solver for a fixed set of constraint rows, by the nullspace
/// method. Redundant rows are tolerated (their multipliers get the
/// minimum-norm split); inconsistent right-hand sides raise SingularKktError.
class SaddlePointSolver {
 public:
  SaddlePointSolver(Eigen::MatrixXd rows, std::vector<std::string> row_labels);

  /// Factorizes the reduced mass matrix Z^T diag(mass) Z.
  class Factor {
   public:
    const Eigen::VectorXd& mass() const noexcept { return mass_; }

   private:
    friend class SaddlePointSolver;
    Eigen::VectorXd mass_;
    Eigen::LLT<Eigen::MatrixXd> reduced_;
  };

  Factor factor(const Eigen::VectorXd& mass) const;

  struct Solution {
    Eigen::VectorXd acceleration;
    Eigen::VectorXd multipliers;
  };

  /// Solves diag(mass) a - rows^T l = tau, rows a = rhs.
  Solution solve(const Factor& factor, const Eigen::VectorXd& tau, const Eigen::VectorXd& rhs) const;

  const Eigen::MatrixXd& rows() const noexcept { return rows_; }
  std::size_t rank() const noexcept { return rank_; }
  const Eigen::MatrixXd& nullspace() const noexcept { return nullspace_; }

 private:
  Eigen::MatrixXd rows_;
  std::vector<std::string> labels_;
  std::size_t rank_ = 0;
  Eigen::MatrixXd range_;       // U_r
  Eigen::MatrixXd particular_;  // pinv(rows)
  Eigen::MatrixXd dual_;        // pinv(rows^T)
  Eigen::MatrixXd nullspace_;   // Z
};

struct State {
  double t = 0.0;
  Eigen::VectorXd velocity;
};

/// Everything solved at one instant; torques are per shaft.
struct StepSolution {
  Eigen::VectorXd acceleration;
  /// One per element row, then one per pinned shaft.
  Eigen::VectorXd multipliers;
  /// Load torque as used in the solve (viscous evaluated at the advanced
  /// velocity for semi-implicit Euler).
  Eigen::VectorXd load_torque;
  /// Effort-source value or pinning reaction.
  Eigen::VectorXd source_torque;
};

/// Flattened (element, port) torque column.
struct PortColumn {
  ElementId element;
  std::string element_name;
  std::string port;
  ShaftId shaft;
  double coefficient = 0.0;
};

std::vector<PortColumn> port_columns(const MechanismGraph& graph);

/// A scenario compiled for repeated stepping: constraint rows, pins, mass
/// and their factorizations are built once.
class ConstrainedSystem {
 public:
  /// Validates the scenario.
  explicit ConstrainedSystem(Scenario scenario);

  const Scenario& scenario() const noexcept { return scenario_; }
  const MechanismGraph& graph() const noexcept { return *scenario_.graph; }
  const Eigen::VectorXd& mass() const noexcept { return mass_; }
  const std::vector<PortColumn>& columns() const noexcept { return columns_; }
  std::size_t element_rows() const noexcept { return element_rows_; }

  /// Consistent start state at t = 0.
  State initial_state() const;

  /// Solution used to advance from state with the scenario's integrator.
  StepSolution solve(const State& state) const;

  /// Advances one timestep; when record is non-null it receives the solution
  /// at the start of the step.
  State step(const State& state, StepSolution* record = nullptr) const;

  Eigen::VectorXd port_torques(const StepSolution& solution) const;

 private:
  struct Pin {
    ShaftId shaft;
    std::optional<TimeFunction> omega;  // empty means locked at zero
  };

  Eigen::VectorXd explicit_torque(double t, const Eigen::VectorXd& v) const;
  int pin_index(ShaftId id) const;
  StepSolution derivative(double t, const Eigen::VectorXd& v) const;
  void pin_velocities(double t, Eigen::VectorXd& v) const;

  Scenario scenario_;
  std::size_t n_ = 0;
  std::size_t element_rows_ = 0;
  Eigen::MatrixXd constraints_;
  std::vector<Pin> pins_;
  Eigen::VectorXd mass_;
  Eigen::VectorXd damping_;
  std::vector<std::pair<ShaftId, TimeFunction>> efforts_;
  std::vector<std::pair<ShaftId, TimeFunction>> applied_;
  std::vector<std::pair<ShaftId, double>> resistive_;
  std::vector<PortColumn> columns_;
  std::unique_ptr<SaddlePointSolver> solver_;
  SaddlePointSolver::Factor free_factor_;
  SaddlePointSolver::Factor damped_factor_;
};

/// One step of the scenario's integrator from the given state.
State step(const Scenario& scenario, const State& state);

struct Trajectory {
  std::vector<std::string> shaft_names;
  std::vector<PortColumn> ports;
  /// Inertias used by the simulation and which of them were substituted.
  Eigen::VectorXd inertia_used;
  std::vector<bool> epsilon_substituted;
  double timestep = 0.0;
  Integrator integrator = Integrator::semi_implicit_euler;
  bool has_torques = false;

  std::vector<double> time;
  std::vector<Eigen::VectorXd> velocity;
  std::vector<Eigen::VectorXd> acceleration;
  /// Present only when has_torques.
  std::vector<Eigen::VectorXd> port_torque;
  std::vector<Eigen::VectorXd> load_torque;
  std::vector<Eigen::VectorXd> source_torque;

  std::size_t size() const noexcept { return time.size(); }
  bool empty() const noexcept { return time.empty(); }
  std::optional<std::size_t> port_column(std::string_view element, std::string_view port) const;
};

/// Samples t_k = k * timestep for k = 0..N with N = round(duration / timestep).
/// Sample k stores the state at t_k and the solution taken from it. Solver
/// errors are rethrown with the failing step index.
Trajectory simulate(const Scenario& scenario);

/// Instantaneous accelerations from rest when torque tau acts on target and
/// the held shafts are pinned.
std::map<ShaftId, double> impulse_response(const MechanismGraph& graph, ShaftId target, double tau,
                                           const std::set<ShaftId>& held,
                                           double epsilon_inertia = kDefaultEpsilonInertia);

}  // namespace gearnet
