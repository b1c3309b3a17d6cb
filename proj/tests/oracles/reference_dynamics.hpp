#pragma once

// Reference integrators that share no solver code with the library.

#include <map>
#include <random>
#include <set>

#include <Eigen/Core>

#include "gearnet/dynamics.hpp"

namespace oracle {

Eigen::MatrixXd dense_rows(const gearnet::MechanismGraph& graph);

/// Penalty method: every constraint row becomes a stiff spring-damper on the
/// accumulated constraint displacement, integrated with implicit Euler.
/// Velocity prescriptions are imposed by row replacement. Starts from rest.
struct PenaltyOptions {
  double stiffness = 1e10;  // constraint compliance error scales as 1 / stiffness
  double timestep = 1e-5;
};

Eigen::VectorXd penalty_final_velocity(const gearnet::Scenario& scenario, const PenaltyOptions& options = {});

/// Accelerations from rest by a dense LU solve of the full saddle system.
Eigen::VectorXd dense_impulse(const gearnet::MechanismGraph& graph, gearnet::ShaftId target, double tau,
                              const std::set<gearnet::ShaftId>& held);

/// Connected graph of 2..6 shafts with positive inertias whose elements each
/// introduce a fresh shaft, plus a torque or ramped velocity drive and
/// viscous or constant applied loads.
gearnet::Scenario random_scenario(std::mt19937& rng, double duration = 0.1);

}  // namespace oracle
