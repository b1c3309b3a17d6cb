#include "reference_dynamics.hpp"

#include <cmath>

#include <Eigen/LU>

#include "rational_rank.hpp"

namespace oracle {

using namespace gearnet;

Eigen::MatrixXd dense_rows(const MechanismGraph& graph) {
  const RationalMatrix exact = rational_rows(graph);
  Eigen::MatrixXd c(static_cast<Eigen::Index>(exact.size()), static_cast<Eigen::Index>(graph.shaft_count()));
  for (std::size_t r = 0; r < exact.size(); ++r) {
    for (std::size_t k = 0; k < exact[r].size(); ++k) {
      c(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = exact[r][k].convert_to<double>();
    }
  }
  return c;
}

Eigen::VectorXd penalty_final_velocity(const Scenario& s, const PenaltyOptions& options) {
  const MechanismGraph& g = *s.graph;
  const auto n = static_cast<Eigen::Index>(g.shaft_count());
  const Eigen::MatrixXd c = dense_rows(g);
  const Eigen::MatrixXd ctc = c.transpose() * c;
  const double dt = options.timestep;
  const double k = options.stiffness;

  Eigen::VectorXd m(n);
  for (const auto& sh : g.shafts()) m(static_cast<Eigen::Index>(sh.id.value)) = sh.inertia > 0 ? sh.inertia : s.epsilon_inertia;
  const double damping = 2.0 * std::sqrt(k * m.minCoeff());

  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  std::vector<std::pair<Eigen::Index, TimeFunction>> torques;
  std::vector<std::pair<Eigen::Index, std::optional<TimeFunction>>> pins;
  const auto add_drive = [&](const auto& d) {
    using D = std::decay_t<decltype(d)>;
    const auto i = static_cast<Eigen::Index>(d.input.value);
    if constexpr (std::is_same_v<D, TorqueDriven>) torques.emplace_back(i, d.tau_e);
    if constexpr (std::is_same_v<D, VelocityDriven>) pins.emplace_back(i, d.omega);
    if constexpr (std::is_same_v<D, InputLocked>) pins.emplace_back(i, std::nullopt);
  };
  std::visit(add_drive, s.drive);
  for (const auto& [id, load] : s.loads) {
    const auto i = static_cast<Eigen::Index>(id.value);
    if (const auto* v = std::get_if<Viscous>(&load)) b(i) += v->b;
    if (const auto* a = std::get_if<AppliedTorque>(&load)) torques.emplace_back(i, a->tau);
    if (std::holds_alternative<Locked>(load)) pins.emplace_back(i, std::nullopt);
  }
  for (const auto& [id, src] : s.sources) {
    const auto i = static_cast<Eigen::Index>(id.value);
    if (const auto* e = std::get_if<EffortSource>(&src)) torques.emplace_back(i, e->tau);
    if (const auto* f = std::get_if<FlowSource>(&src)) pins.emplace_back(i, f->omega);
  }

  Eigen::MatrixXd a = Eigen::MatrixXd(m.asDiagonal()) + dt * Eigen::MatrixXd(b.asDiagonal()) + (dt * damping + dt * dt * k) * ctc;
  for (const auto& [i, _] : pins) {
    a.row(i).setZero();
    a(i, i) = 1.0;
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
  const auto steps = static_cast<long>(std::llround(s.duration / dt));
  for (long step = 0; step < steps; ++step) {
    const double t1 = static_cast<double>(step + 1) * dt;
    Eigen::VectorXd tau = Eigen::VectorXd::Zero(n);
    for (const auto& [i, f] : torques) tau(i) += f(t1);
    Eigen::VectorXd rhs = m.cwiseProduct(v) + dt * (tau - k * ctc * q);
    for (const auto& [i, f] : pins) rhs(i) = f ? (*f)(t1) : 0.0;
    v = lu.solve(rhs);
    q += dt * v;
  }
  return v;
}

Eigen::VectorXd dense_impulse(const MechanismGraph& graph, ShaftId target, double tau, const std::set<ShaftId>& held) {
  const auto n = static_cast<Eigen::Index>(graph.shaft_count());
  const Eigen::MatrixXd c = dense_rows(graph);
  const Eigen::Index m = c.rows() + static_cast<Eigen::Index>(held.size());
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(m, n);
  rows.topRows(c.rows()) = c;
  Eigen::Index r = c.rows();
  for (const auto id : held) rows(r++, static_cast<Eigen::Index>(id.value)) = 1.0;

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
  for (const auto& s : graph.shafts()) {
    const auto i = static_cast<Eigen::Index>(s.id.value);
    kkt(i, i) = s.inertia > 0 ? s.inertia : kDefaultEpsilonInertia;
  }
  kkt.topRightCorner(n, m) = -rows.transpose();
  kkt.bottomLeftCorner(m, n) = rows;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
  rhs(static_cast<Eigen::Index>(target.value)) = tau;
  return Eigen::FullPivLU<Eigen::MatrixXd>(kkt).solve(rhs).head(n);
}

Scenario random_scenario(std::mt19937& rng, double duration) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const auto pick = [&](std::size_t count) { return static_cast<std::size_t>(rng() % count); };

  auto g = std::make_shared<MechanismGraph>();
  const std::size_t n = 2 + pick(5);
  std::vector<ShaftId> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(g->add_shaft("s" + std::to_string(i), uniform(0.2, 2.0)));

  // Each new shaft joins through one element touching one or two older shafts.
  for (std::size_t i = 1; i < n; ++i) {
    const ShaftId fresh = ids[i];
    const ShaftId old = ids[pick(i)];
    const int kind = i >= 2 ? static_cast<int>(pick(5)) : static_cast<int>(pick(3));
    ShaftId other = ids[pick(i)];
    if (kind >= 3 && other == old) other = ids[(old.value + 1) % i];
    const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    switch (kind) {
      case 0: g->add_element(FixedRatio{old, fresh, sign * uniform(0.5, 3.0)}); break;
      case 1: g->add_element(RigidCoupling{old, fresh, sign > 0 ? 1 : -1}); break;
      case 2: g->add_element(WormPair{old, fresh, uniform(1.0, 10.0), true}); break;
      case 3: g->add_element(Differential{fresh, old, other}); break;
      default: g->add_element(Planetary{old, fresh, other, uniform(0.5, 3.0)}); break;
    }
  }
  g->finalize();

  Scenario s;
  s.graph = g;
  s.duration = duration;
  // Drive a shaft that actually moves in the single feasible mode.
  const Eigen::VectorXd mode = Eigen::FullPivLU<Eigen::MatrixXd>(dense_rows(*g)).kernel().col(0);
  std::vector<ShaftId> movable;
  for (const auto id : ids) {
    if (std::abs(mode(static_cast<Eigen::Index>(id.value))) > 0.1 * mode.cwiseAbs().maxCoeff()) movable.push_back(id);
  }
  const ShaftId input = movable[pick(movable.size())];
  if (unit(rng) < 0.5) {
    s.drive = TorqueDriven{input, uniform(-2.0, 2.0)};
  } else {
    // Ramp from rest so the start state is consistent for both integrators.
    s.drive = VelocityDriven{input, TimeFunction::piecewise_linear({{0.0, 0.0}, {0.05, uniform(-3.0, 3.0)}})};
  }
  for (const auto id : ids) {
    if (id == input) continue;
    const double u = unit(rng);
    if (u < 0.4) {
      s.loads[id] = Viscous{uniform(0.0, 2.0)};
    } else if (u < 0.6) {
      s.loads[id] = AppliedTorque{uniform(-1.0, 1.0)};
    }
  }
  return s;
}

}  // namespace oracle
