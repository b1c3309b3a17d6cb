#pragma once

#include <iosfwd>
#include <string>

#include "gearnet/dynamics.hpp"

namespace gearnet {

/// Header: t, then <shaft>.omega,<shaft>.alpha per shaft, then
/// <element>.tau_<port> per port when torques were recorded. Values are
/// written with 17 significant digits so a file reproduces the doubles.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
std::string trajectory_csv(const Trajectory& trajectory);

}  // namespace gearnet
