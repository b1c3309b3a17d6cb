#include "gearnet/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "gearnet/errors.hpp"

namespace gearnet {
namespace {

// Full-V SVD that also copes with empty matrices.
struct Svd {
  Eigen::VectorXd singular;
  Eigen::MatrixXd v;
  std::size_t rank = 0;
};

Svd decompose(const Eigen::MatrixXd& m) {
  Svd out;
  const Eigen::Index cols = m.cols();
  if (m.rows() == 0 || cols == 0) {
    out.v = Eigen::MatrixXd::Identity(cols, cols);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.singular = svd.singularValues();
  out.v = svd.matrixV();
  const double largest = out.singular.size() ? out.singular(0) : 0.0;
  for (Eigen::Index i = 0; i < out.singular.size(); ++i) {
    if (out.singular(i) > kRankTolerance * largest && out.singular(i) > 0.0) ++out.rank;
  }
  return out;
}

void normalize_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    for (Eigen::Index r = 0; r < basis.rows(); ++r) {
      if (std::abs(basis(r, c)) > 1e-12) {
        if (basis(r, c) < 0.0) basis.col(c) *= -1.0;
        break;
      }
    }
  }
}

Eigen::MatrixXd kernel(const Eigen::MatrixXd& m) {
  const Svd svd = decompose(m);
  const auto rank = static_cast<Eigen::Index>(svd.rank);
  Eigen::MatrixXd basis = svd.v.rightCols(m.cols() - rank);
  normalize_signs(basis);
  return basis;
}

}  // namespace

ConstraintMatrix constraint_matrix(const MechanismGraph& graph) {
  const auto elements = graph.elements();
  ConstraintMatrix out;
  out.rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(elements.size()),
                                   static_cast<Eigen::Index>(graph.shaft_count()));
  out.row_provenance.reserve(elements.size());
  for (std::size_t r = 0; r < elements.size(); ++r) {
    for (const auto& p : ports(elements[r].kind)) {
      out.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p.shaft.value)) += p.coefficient;
    }
    out.row_provenance.push_back(elements[r].id);
  }
  return out;
}

std::size_t numerical_rank(const Eigen::MatrixXd& m) { return decompose(m).rank; }

MobilityReport mobility(const MechanismGraph& graph) {
  const ConstraintMatrix c = constraint_matrix(graph);
  MobilityReport report;
  report.n_shafts = graph.shaft_count();
  report.n_rows = static_cast<std::size_t>(c.rows.rows());
  report.rank = numerical_rank(c.rows);
  report.nullity = report.n_shafts - report.rank;

  const Eigen::MatrixXd basis = kernel(c.rows);
  const auto external = graph.external();
  if (!external.empty() && basis.cols() > 0) {
    Eigen::MatrixXd projected(static_cast<Eigen::Index>(external.size()), basis.cols());
    for (std::size_t i = 0; i < external.size(); ++i) {
      projected.row(static_cast<Eigen::Index>(i)) = basis.row(static_cast<Eigen::Index>(external[i].value));
    }
    // The basis is orthonormal, so projected singular values are at most 1
    // and an absolute threshold is meaningful.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(projected);
    const Eigen::VectorXd s = svd.singularValues();
    report.external_dof = static_cast<std::size_t>((s.array() > kRankTolerance).count());
  }
  return report;
}

Eigen::MatrixXd nullspace_basis(const MechanismGraph& graph) { return kernel(constraint_matrix(graph).rows); }

VelocitySolution solve_velocities(const MechanismGraph& graph, const std::map<ShaftId, double>& prescribed,
                                  const SolveOptions& options) {
  if (prescribed.empty()) throw PreconditionError("solve_velocities: prescription must not be empty");
  const auto n = static_cast<Eigen::Index>(graph.shaft_count());
  for (const auto& [id, value] : prescribed) {
    if (static_cast<Eigen::Index>(id.value) >= n) throw PreconditionError("solve_velocities: unknown shaft id");
    if (!std::isfinite(value)) throw PreconditionError("solve_velocities: prescribed value is not finite");
  }

  const Eigen::MatrixXd c = constraint_matrix(graph).rows;
  std::vector<Eigen::Index> free;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto it = prescribed.find(ShaftId{static_cast<std::size_t>(i)});
    if (it == prescribed.end()) {
      free.push_back(i);
    } else {
      v(i) = it->second;
    }
  }

  const auto nf = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd c_free(c.rows(), nf);
  for (Eigen::Index j = 0; j < nf; ++j) c_free.col(j) = c.col(free[static_cast<std::size_t>(j)]);
  const Eigen::VectorXd rhs = -(c * v);

  VelocitySolution out;
  Eigen::MatrixXd free_kernel = Eigen::MatrixXd::Identity(nf, nf);
  if (nf > 0 && c.rows() > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c_free, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd s = svd.singularValues();
    const double largest = s.size() ? s(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > kRankTolerance * largest && s(i) > 0.0) ++rank;
    }
    const Eigen::MatrixXd u = svd.matrixU().leftCols(rank);
    const Eigen::MatrixXd vv = svd.matrixV().leftCols(rank);
    const Eigen::VectorXd x = vv * (u.transpose() * rhs).cwiseQuotient(s.head(rank));
    for (Eigen::Index j = 0; j < nf; ++j) v(free[static_cast<std::size_t>(j)]) = x(j);
    free_kernel = svd.matrixV().rightCols(nf - rank);
  }

  out.residual = c.rows() ? (c * v).cwiseAbs().maxCoeff() : 0.0;
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  if (out.residual > kFeasibilityTolerance * scale) {
    std::ostringstream msg;
    msg << "prescribed velocities violate the constraint network (|C v|_inf = " << out.residual << ")";
    throw InfeasibleError(msg.str(), out.residual);
  }

  out.undetermined = Eigen::MatrixXd::Zero(n, free_kernel.cols());
  for (Eigen::Index j = 0; j < nf; ++j) out.undetermined.row(free[static_cast<std::size_t>(j)]) = free_kernel.row(j);
  normalize_signs(out.undetermined);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.undetermined.cols() > 0 && out.undetermined.row(i).cwiseAbs().maxCoeff() > kFeasibilityTolerance) {
      out.undetermined_shafts.push_back(ShaftId{static_cast<std::size_t>(i)});
    }
  }

  if (options.require_external_determined) {
    std::vector<std::string> loose;
    for (const auto id : graph.external()) {
      if (std::find(out.undetermined_shafts.begin(), out.undetermined_shafts.end(), id) != out.undetermined_shafts.end()) {
        loose.push_back(graph.shaft(id).name);
      }
    }
    if (!loose.empty()) {
      std::string msg = "external shafts not determined by the prescription:";
      for (const auto& name : loose) msg += " " + name;
      throw UnderdeterminedError(msg, std::move(loose));
    }
  }

  out.velocity = std::move(v);
  return out;
}

}  // namespace gearnet
