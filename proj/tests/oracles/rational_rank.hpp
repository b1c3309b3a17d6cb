#pragma once

// Exact linear algebra over the rationals, independent of the library's
// floating-point assembly. Element rows are rebuilt here from their
// definitions; doubles convert to rationals exactly.

#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gearnet/mechanism.hpp"

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;
using RationalMatrix = std::vector<std::vector<Rational>>;

RationalMatrix rational_rows(const gearnet::MechanismGraph& graph);

std::size_t rank(RationalMatrix m);

/// Basis of the right nullspace, one vector per free column.
RationalMatrix nullspace(const RationalMatrix& m, std::size_t columns);

struct ExactMobility {
  std::size_t rank = 0;
  std::size_t nullity = 0;
  std::size_t external_dof = 0;
};

ExactMobility exact_mobility(const gearnet::MechanismGraph& graph);

}  // namespace oracle
