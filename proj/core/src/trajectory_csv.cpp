#include "gearnet/trajectory_csv.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

namespace gearnet {
namespace {

void put(std::ostream& out, double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  out << ',' << buffer;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << 't';
  for (const auto& name : trajectory.shaft_names) out << ',' << name << ".omega," << name << ".alpha";
  if (trajectory.has_torques) {
    for (const auto& p : trajectory.ports) out << ',' << p.element_name << ".tau_" << p.port;
  }
  out << '\n';

  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", trajectory.time[k]);
    out << buffer;
    const auto& v = trajectory.velocity[k];
    const auto& a = trajectory.acceleration[k];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      put(out, v(i));
      put(out, a(i));
    }
    if (trajectory.has_torques) {
      const auto& tau = trajectory.port_torque[k];
      for (Eigen::Index i = 0; i < tau.size(); ++i) put(out, tau(i));
    }
    out << '\n';
  }
}

std::string trajectory_csv(const Trajectory& trajectory) {
  std::ostringstream out;
  write_trajectory_csv(out, trajectory);
  return out.str();
}

}  // namespace gearnet
