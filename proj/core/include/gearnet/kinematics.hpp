#pragma once

#include <map>
#include <vector>

#include <Eigen/Core>

#include "gearnet/mechanism.hpp"

namespace gearnet {

/// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kRankTolerance = 1e-10;
/// A velocity prescription is infeasible when |C v|_inf exceeds this
/// multiple of max(1, |v|_inf).
inline constexpr double kFeasibilityTolerance = 1e-9;

/// One row per element, one column per shaft: C * omega = 0 characterizes
/// every feasible velocity state.
struct ConstraintMatrix {
  Eigen::MatrixXd rows;
  std::vector<ElementId> row_provenance;
};

ConstraintMatrix constraint_matrix(const MechanismGraph& graph);

struct MobilityReport {
  std::size_t n_shafts = 0;
  std::size_t n_rows = 0;
  std::size_t rank = 0;
  std::size_t nullity = 0;
  /// Rank of the nullspace basis restricted to the graph's external shafts.
  std::size_t external_dof = 0;
};

/// Numerical rank of a matrix using kRankTolerance relative to its largest
/// singular value.
std::size_t numerical_rank(const Eigen::MatrixXd& m);

MobilityReport mobility(const MechanismGraph& graph);

/// Orthonormal basis of null(C), one column per vector. Each vector's first
/// significant entry is made positive so the output is deterministic.
Eigen::MatrixXd nullspace_basis(const MechanismGraph& graph);

struct SolveOptions {
  /// Raise UnderdeterminedError when an external shaft is not pinned down.
  bool require_external_determined = true;
};

struct VelocitySolution {
  /// Indexed by shaft id.
  Eigen::VectorXd velocity;
  /// Columns span the freedom left after prescription, over all shafts
  /// (zero on prescribed ones). The minimum-norm completion is returned.
  Eigen::MatrixXd undetermined;
  /// Shafts whose speed varies within the undetermined subspace.
  std::vector<ShaftId> undetermined_shafts;
  double residual = 0.0;

  double operator[](ShaftId id) const { return velocity[static_cast<Eigen::Index>(id.value)]; }
};

/// Minimum-norm feasible completion of a partial velocity prescription.
VelocitySolution solve_velocities(const MechanismGraph& graph, const std::map<ShaftId, double>& prescribed,
                                  const SolveOptions& options = {});

}  // namespace gearnet
