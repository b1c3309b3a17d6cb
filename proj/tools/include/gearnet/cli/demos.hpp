#pragma once

#include <string_view>

#include "gearnet/dynamics.hpp"

namespace gearnet::cli {

enum class Demo3ood {
  /// Input velocity-driven at 20 rad/s, viscous b = 1 on every output, 0.5 s.
  equal_loads,
  /// Input locked, O1 velocity-driven at 3 rad/s, viscous b = 1 on O2 and O3, 0.5 s.
  output_driven,
  /// Effort of 3 N m on the input, viscous b = 1 on every output, 1 s.
  torque_driven,
};

Scenario demo_3ood_scenario(Demo3ood mode);

}  // namespace gearnet::cli
