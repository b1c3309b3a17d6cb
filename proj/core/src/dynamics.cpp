#include "gearnet/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "gearnet/errors.hpp"
#include "gearnet/kinematics.hpp"

namespace gearnet {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Eigen::Index idx(ShaftId id) { return static_cast<Eigen::Index>(id.value); }

constexpr double kConsistencyTolerance = 1e-9;

}  // namespace

ShaftId drive_shaft(const DriveMode& drive) {
  return std::visit([](const auto& d) { return d.input; }, drive);
}

std::string_view drive_name(const DriveMode& drive) {
  return std::visit(Overloaded{
                        [](const TorqueDriven&) { return std::string_view("torque"); },
                        [](const VelocityDriven&) { return std::string_view("velocity"); },
                        [](const InputLocked&) { return std::string_view("locked"); },
                    },
                    drive);
}

std::string_view to_string(Integrator integrator) {
  return integrator == Integrator::rk4 ? "rk4" : "semi-implicit-euler";
}

void validate(const Scenario& scenario) {
  const auto fail = [](const std::string& what) { throw PreconditionError("scenario: " + what); };
  if (!scenario.graph) fail("no mechanism graph");
  const MechanismGraph& graph = *scenario.graph;
  if (!graph.finalized()) fail("mechanism graph is not finalized");
  if (!(scenario.duration > 0.0) || !std::isfinite(scenario.duration)) fail("duration must be > 0");
  if (!(scenario.timestep > 0.0) || !std::isfinite(scenario.timestep)) fail("timestep must be > 0");
  if (!(scenario.epsilon_inertia > 0.0) || !std::isfinite(scenario.epsilon_inertia)) {
    fail("epsilon_inertia must be > 0");
  }

  const auto check_shaft = [&](ShaftId id, const std::string& what) {
    if (id.value >= graph.shaft_count()) fail(what + " refers to unknown shaft #" + std::to_string(id.value));
  };
  const ShaftId input = drive_shaft(scenario.drive);
  check_shaft(input, "drive");

  for (const auto& [id, load] : scenario.loads) {
    check_shaft(id, "load");
    const std::string& name = graph.shaft(id).name;
    std::visit(Overloaded{
                   [](const Free&) {},
                   [&](const Viscous& v) {
                     if (!(v.b >= 0.0)) fail("viscous coefficient on '" + name + "' must be >= 0");
                   },
                   [&](const ConstantResistive& r) {
                     if (!(r.tau_r >= 0.0)) fail("resistive torque on '" + name + "' must be >= 0");
                   },
                   [&](const Locked&) {
                     if (id == input) fail("shaft '" + name + "' is both the drive input and locked");
                   },
                   [](const AppliedTorque&) {},
               },
               load);
  }
  for (const auto& [id, source] : scenario.sources) {
    check_shaft(id, "source");
    const std::string& name = graph.shaft(id).name;
    if (id == input) fail("shaft '" + name + "' already carries the drive");
    const auto load = scenario.loads.find(id);
    if (std::holds_alternative<FlowSource>(source) && load != scenario.loads.end() &&
        std::holds_alternative<Locked>(load->second)) {
      fail("shaft '" + name + "' is both flow-driven and locked");
    }
  }
  for (const auto& [id, value] : scenario.initial_velocity) {
    check_shaft(id, "initial velocity");
    if (!std::isfinite(value)) fail("initial velocity of '" + graph.shaft(id).name + "' is not finite");
  }
}

Eigen::VectorXd effective_inertia(const MechanismGraph& graph, double epsilon_inertia) {
  Eigen::VectorXd m(static_cast<Eigen::Index>(graph.shaft_count()));
  for (const auto& s : graph.shafts()) m(idx(s.id)) = s.inertia > 0.0 ? s.inertia : epsilon_inertia;
  return m;
}

// ---------------------------------------------------------------------------

SaddlePointSolver::SaddlePointSolver(Eigen::MatrixXd rows, std::vector<std::string> row_labels)
    : rows_(std::move(rows)), labels_(std::move(row_labels)) {
  const Eigen::Index m = rows_.rows();
  const Eigen::Index n = rows_.cols();
  if (m == 0) {
    range_.resize(0, 0);
    particular_ = Eigen::MatrixXd::Zero(n, 0);
    dual_ = Eigen::MatrixXd::Zero(0, n);
    nullspace_ = Eigen::MatrixXd::Identity(n, n);
    return;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  const double largest = s.size() ? s(0) : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > kRankTolerance * largest && s(i) > 0.0) ++rank_;
  }
  const auto r = static_cast<Eigen::Index>(rank_);
  const Eigen::MatrixXd u = svd.matrixU().leftCols(r);
  const Eigen::MatrixXd v = svd.matrixV().leftCols(r);
  const Eigen::VectorXd inv = s.head(r).cwiseInverse();
  range_ = u;
  particular_ = v * inv.asDiagonal() * u.transpose();
  dual_ = u * inv.asDiagonal() * v.transpose();
  nullspace_ = svd.matrixV().rightCols(n - r);
}

SaddlePointSolver::Factor SaddlePointSolver::factor(const Eigen::VectorXd& mass) const {
  Factor f;
  f.mass_ = mass;
  if (nullspace_.cols() > 0) {
    const Eigen::MatrixXd reduced = nullspace_.transpose() * mass.asDiagonal() * nullspace_;
    f.reduced_.compute(reduced);
    if (f.reduced_.info() != Eigen::Success) {
      throw SingularKktError("reduced mass matrix is not positive definite", nullspace_.col(0));
    }
  }
  return f;
}

SaddlePointSolver::Solution SaddlePointSolver::solve(const Factor& factor, const Eigen::VectorXd& tau,
                                                     const Eigen::VectorXd& rhs) const {
  if (rows_.rows() > 0) {
    const Eigen::VectorXd projected = range_ * (range_.transpose() * rhs);
    const Eigen::VectorXd conflict = rhs - projected;
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    if (conflict.cwiseAbs().maxCoeff() > kConsistencyTolerance * scale) {
      std::ostringstream msg;
      msg << "conflicting constraint prescriptions; offending rows:";
      const Eigen::VectorXd direction = conflict.normalized();
      for (Eigen::Index i = 0; i < direction.size(); ++i) {
        if (std::abs(direction(i)) > 1e-6) {
          msg << ' ' << (static_cast<std::size_t>(i) < labels_.size() ? labels_[static_cast<std::size_t>(i)] : "?")
              << '(' << direction(i) << ')';
        }
      }
      throw SingularKktError(msg.str(), direction);
    }
  }

  Solution out;
  Eigen::VectorXd a = particular_ * rhs;
  if (nullspace_.cols() > 0) {
    const Eigen::VectorXd reduced_force = nullspace_.transpose() * (tau - factor.mass_.cwiseProduct(a));
    a += nullspace_ * factor.reduced_.solve(reduced_force);
  }
  out.multipliers = dual_ * (factor.mass_.cwiseProduct(a) - tau);
  out.acceleration = std::move(a);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<PortColumn> port_columns(const MechanismGraph& graph) {
  std::vector<PortColumn> columns;
  for (const auto& e : graph.elements()) {
    for (const auto& p : ports(e.kind)) columns.push_back({e.id, e.name, std::string(p.name), p.shaft, p.coefficient});
  }
  return columns;
}

ConstrainedSystem::ConstrainedSystem(Scenario scenario) : scenario_(std::move(scenario)) {
  validate(scenario_);
  const MechanismGraph& graph = *scenario_.graph;
  n_ = graph.shaft_count();
  const auto n = static_cast<Eigen::Index>(n_);

  const ConstraintMatrix c = constraint_matrix(graph);
  element_rows_ = static_cast<std::size_t>(c.rows.rows());
  std::vector<std::string> labels;
  for (const auto id : c.row_provenance) labels.push_back(graph.element(id).name);

  mass_ = effective_inertia(graph, scenario_.epsilon_inertia);
  damping_ = Eigen::VectorXd::Zero(n);

  std::visit(Overloaded{
                 [&](const TorqueDriven& d) { efforts_.emplace_back(d.input, d.tau_e); },
                 [&](const VelocityDriven& d) { pins_.push_back({d.input, d.omega}); },
                 [&](const InputLocked& d) { pins_.push_back({d.input, std::nullopt}); },
             },
             scenario_.drive);
  for (const auto& [id, source] : scenario_.sources) {
    std::visit(Overloaded{
                   [&, id = id](const EffortSource& s) { efforts_.emplace_back(id, s.tau); },
                   [&, id = id](const FlowSource& s) { pins_.push_back({id, s.omega}); },
               },
               source);
  }
  for (const auto& [id, load] : scenario_.loads) {
    std::visit(Overloaded{
                   [](const Free&) {},
                   [&, id = id](const Viscous& v) { damping_(idx(id)) += v.b; },
                   [&, id = id](const ConstantResistive& r) { resistive_.emplace_back(id, r.tau_r); },
                   [&, id = id](const Locked&) { pins_.push_back({id, std::nullopt}); },
                   [&, id = id](const AppliedTorque& a) { applied_.emplace_back(id, a.tau); },
               },
               load);
  }

  constraints_ = Eigen::MatrixXd::Zero(c.rows.rows() + static_cast<Eigen::Index>(pins_.size()), n);
  constraints_.topRows(c.rows.rows()) = c.rows;
  for (std::size_t p = 0; p < pins_.size(); ++p) {
    constraints_(c.rows.rows() + static_cast<Eigen::Index>(p), idx(pins_[p].shaft)) = 1.0;
    labels.push_back("pin:" + graph.shaft(pins_[p].shaft).name);
  }

  solver_ = std::make_unique<SaddlePointSolver>(constraints_, std::move(labels));
  free_factor_ = solver_->factor(mass_);
  damped_factor_ = solver_->factor(mass_ + scenario_.timestep * damping_);
  columns_ = port_columns(graph);
}

int ConstrainedSystem::pin_index(ShaftId id) const {
  for (std::size_t p = 0; p < pins_.size(); ++p) {
    if (pins_[p].shaft == id) return static_cast<int>(p);
  }
  return -1;
}

Eigen::VectorXd ConstrainedSystem::explicit_torque(double t, const Eigen::VectorXd& v) const {
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
  for (const auto& [id, f] : efforts_) tau(idx(id)) += f(t);
  for (const auto& [id, f] : applied_) tau(idx(id)) += f(t);
  for (const auto& [id, tau_r] : resistive_) tau(idx(id)) -= tau_r * std::tanh(v(idx(id)) / kResistiveVelocityScale);
  return tau;
}

void ConstrainedSystem::pin_velocities(double t, Eigen::VectorXd& v) const {
  for (const auto& pin : pins_) v(idx(pin.shaft)) = pin.omega ? (*pin.omega)(t) : 0.0;
}

State ConstrainedSystem::initial_state() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(n);
  for (const auto& [id, value] : scenario_.initial_velocity) v0(idx(id)) = value;

  Eigen::VectorXd target = Eigen::VectorXd::Zero(constraints_.rows());
  for (std::size_t p = 0; p < pins_.size(); ++p) {
    target(static_cast<Eigen::Index>(element_rows_ + p)) = pins_[p].omega ? (*pins_[p].omega)(0.0) : 0.0;
  }
  // Minimum kinetic-energy correction onto the constraint manifold.
  const auto correction = solver_->solve(free_factor_, Eigen::VectorXd::Zero(n), target - constraints_ * v0);
  State s;
  s.t = 0.0;
  s.velocity = v0 + correction.acceleration;
  pin_velocities(0.0, s.velocity);
  return s;
}

StepSolution ConstrainedSystem::derivative(double t, const Eigen::VectorXd& v) const {
  Eigen::VectorXd tau = explicit_torque(t, v) - damping_.cwiseProduct(v);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(constraints_.rows());
  for (std::size_t p = 0; p < pins_.size(); ++p) {
    rhs(static_cast<Eigen::Index>(element_rows_ + p)) = pins_[p].omega ? pins_[p].omega->derivative(t) : 0.0;
  }
  auto sol = solver_->solve(free_factor_, tau, rhs);
  StepSolution out;
  out.load_torque = tau;
  out.source_torque = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
  for (const auto& [id, f] : efforts_) {
    const double value = f(t);
    out.load_torque(idx(id)) -= value;
    out.source_torque(idx(id)) += value;
  }
  for (std::size_t p = 0; p < pins_.size(); ++p) {
    out.source_torque(idx(pins_[p].shaft)) += sol.multipliers(static_cast<Eigen::Index>(element_rows_ + p));
  }
  out.acceleration = std::move(sol.acceleration);
  out.multipliers = std::move(sol.multipliers);
  return out;
}

StepSolution ConstrainedSystem::solve(const State& state) const {
  const double dt = scenario_.timestep;
  const Eigen::VectorXd& v = state.velocity;
  if (scenario_.integrator == Integrator::rk4) return derivative(state.t, v);

  // Semi-implicit Euler: viscous torque taken at v + dt * alpha, which moves
  // dt * B onto the mass diagonal.
  const Eigen::VectorXd tau_other = explicit_torque(state.t, v);
  const Eigen::VectorXd tau = tau_other - damping_.cwiseProduct(v);
  Eigen::VectorXd rhs(constraints_.rows());
  rhs.head(static_cast<Eigen::Index>(element_rows_)) =
      -(constraints_.topRows(static_cast<Eigen::Index>(element_rows_)) * v) / dt;
  for (std::size_t p = 0; p < pins_.size(); ++p) {
    const double target = pins_[p].omega ? (*pins_[p].omega)(state.t + dt) : 0.0;
    rhs(static_cast<Eigen::Index>(element_rows_ + p)) = (target - v(idx(pins_[p].shaft))) / dt;
  }
  auto sol = solver_->solve(damped_factor_, tau, rhs);

  StepSolution out;
  out.load_torque = tau_other - damping_.cwiseProduct(v + dt * sol.acceleration);
  out.source_torque = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
  for (const auto& [id, f] : efforts_) {
    const double value = f(state.t);
    out.load_torque(idx(id)) -= value;
    out.source_torque(idx(id)) += value;
  }
  for (std::size_t p = 0; p < pins_.size(); ++p) {
    out.source_torque(idx(pins_[p].shaft)) += sol.multipliers(static_cast<Eigen::Index>(element_rows_ + p));
  }
  out.acceleration = std::move(sol.acceleration);
  out.multipliers = std::move(sol.multipliers);
  return out;
}

State ConstrainedSystem::step(const State& state, StepSolution* record) const {
  const double dt = scenario_.timestep;
  State next;
  next.t = state.t + dt;
  if (scenario_.integrator == Integrator::rk4) {
    const StepSolution k1 = derivative(state.t, state.velocity);
    const Eigen::VectorXd& v = state.velocity;
    const Eigen::VectorXd a2 = derivative(state.t + 0.5 * dt, v + 0.5 * dt * k1.acceleration).acceleration;
    const Eigen::VectorXd a3 = derivative(state.t + 0.5 * dt, v + 0.5 * dt * a2).acceleration;
    const Eigen::VectorXd a4 = derivative(state.t + dt, v + dt * a3).acceleration;
    next.velocity = v + (dt / 6.0) * (k1.acceleration + 2.0 * a2 + 2.0 * a3 + a4);
    if (record) *record = k1;
  } else {
    StepSolution sol = solve(state);
    next.velocity = state.velocity + dt * sol.acceleration;
    if (record) *record = std::move(sol);
  }
  pin_velocities(next.t, next.velocity);
  return next;
}

Eigen::VectorXd ConstrainedSystem::port_torques(const StepSolution& solution) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(columns_.size()));
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) =
        columns_[i].coefficient * solution.multipliers(static_cast<Eigen::Index>(columns_[i].element.value));
  }
  return out;
}

State step(const Scenario& scenario, const State& state) {
  const ConstrainedSystem system(scenario);
  if (state.velocity.size() != static_cast<Eigen::Index>(scenario.graph->shaft_count())) {
    throw PreconditionError("step: state size does not match the graph");
  }
  return system.step(state);
}

std::optional<std::size_t> Trajectory::port_column(std::string_view element, std::string_view port) const {
  for (std::size_t i = 0; i < ports.size(); ++i) {
    if (ports[i].element_name == element && ports[i].port == port) return i;
  }
  return std::nullopt;
}

Trajectory simulate(const Scenario& scenario) {
  const ConstrainedSystem system(scenario);
  const MechanismGraph& graph = system.graph();

  Trajectory traj;
  for (const auto& s : graph.shafts()) {
    traj.shaft_names.push_back(s.name);
    traj.epsilon_substituted.push_back(!(s.inertia > 0.0));
  }
  traj.ports = system.columns();
  traj.inertia_used = system.mass();
  traj.timestep = scenario.timestep;
  traj.integrator = scenario.integrator;
  traj.has_torques = scenario.record_torques;

  const auto steps = static_cast<std::size_t>(std::llround(scenario.duration / scenario.timestep));
  traj.time.reserve(steps + 1);
  traj.velocity.reserve(steps + 1);
  traj.acceleration.reserve(steps + 1);

  State state = system.initial_state();
  for (std::size_t k = 0; k <= steps; ++k) {
    state.t = static_cast<double>(k) * scenario.timestep;
    StepSolution sol;
    State next;
    try {
      next = system.step(state, &sol);
    } catch (const SingularKktError& err) {
      throw SingularKktError("step " + std::to_string(k) + ": " + err.what(), err.direction());
    } catch (const SolverError& err) {
      throw SolverError("step " + std::to_string(k) + ": " + err.what());
    }
    traj.time.push_back(state.t);
    traj.velocity.push_back(state.velocity);
    traj.acceleration.push_back(sol.acceleration);
    if (traj.has_torques) {
      traj.port_torque.push_back(system.port_torques(sol));
      traj.load_torque.push_back(sol.load_torque);
      traj.source_torque.push_back(sol.source_torque);
    }
    state = std::move(next);
  }
  return traj;
}

std::map<ShaftId, double> impulse_response(const MechanismGraph& graph, ShaftId target, double tau,
                                           const std::set<ShaftId>& held, double epsilon_inertia) {
  const auto n = static_cast<Eigen::Index>(graph.shaft_count());
  if (target.value >= graph.shaft_count()) throw PreconditionError("impulse_response: unknown target shaft");
  if (!(epsilon_inertia > 0.0)) throw PreconditionError("impulse_response: epsilon_inertia must be > 0");

  const ConstraintMatrix c = constraint_matrix(graph);
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(c.rows.rows() + static_cast<Eigen::Index>(held.size()), n);
  rows.topRows(c.rows.rows()) = c.rows;
  std::vector<std::string> labels;
  for (const auto id : c.row_provenance) labels.push_back(graph.element(id).name);
  Eigen::Index r = c.rows.rows();
  for (const auto id : held) {
    if (id.value >= graph.shaft_count()) throw PreconditionError("impulse_response: unknown held shaft");
    rows(r++, idx(id)) = 1.0;
    labels.push_back("pin:" + graph.shaft(id).name);
  }

  const SaddlePointSolver solver(rows, std::move(labels));
  const auto factor = solver.factor(effective_inertia(graph, epsilon_inertia));
  Eigen::VectorXd force = Eigen::VectorXd::Zero(n);
  force(idx(target)) = tau;
  const auto sol = solver.solve(factor, force, Eigen::VectorXd::Zero(rows.rows()));

  std::map<ShaftId, double> out;
  for (Eigen::Index i = 0; i < n; ++i) out[ShaftId{static_cast<std::size_t>(i)}] = sol.acceleration(i);
  return out;
}

}  // namespace gearnet
