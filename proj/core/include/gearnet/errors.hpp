#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gearnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed mechanism, scenario or description input. Maps to CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical failure of a solve. Maps to CLI exit code 2.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Prescribed velocities are incompatible with the constraint network.
class InfeasibleError : public SolverError {
 public:
  InfeasibleError(const std::string& what, double residual)
      : SolverError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// An external shaft is left undetermined by a velocity prescription.
class UnderdeterminedError : public SolverError {
 public:
  UnderdeterminedError(const std::string& what, std::vector<std::string> shafts)
      : SolverError(what), shafts_(std::move(shafts)) {}
  const std::vector<std::string>& shafts() const noexcept { return shafts_; }

 private:
  std::vector<std::string> shafts_;
};

/// The saddle-point system has no solution, usually conflicting prescriptions.
/// direction() is the combination of constraint rows that cannot be satisfied.
class SingularKktError : public SolverError {
 public:
  SingularKktError(const std::string& what, Eigen::VectorXd direction)
      : SolverError(what), direction_(std::move(direction)) {}
  const Eigen::VectorXd& direction() const noexcept { return direction_; }

 private:
  Eigen::VectorXd direction_;
};

/// A torque check was requested on a trajectory recorded without torques.
class MissingTorqueError : public Error {
 public:
  using Error::Error;
};

}  // namespace gearnet
