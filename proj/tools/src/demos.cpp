#include "gearnet/cli/demos.hpp"

#include "gearnet/builders.hpp"

namespace gearnet::cli {

Scenario demo_3ood_scenario(Demo3ood mode) {
  auto graph = std::make_shared<MechanismGraph>(build_3ood());
  const ShaftId input = graph->shaft_id("I");
  const ShaftId o1 = graph->shaft_id("O1");
  const ShaftId o2 = graph->shaft_id("O2");
  const ShaftId o3 = graph->shaft_id("O3");

  Scenario s;
  s.graph = graph;
  switch (mode) {
    case Demo3ood::equal_loads:
      s.drive = VelocityDriven{input, 20.0};
      for (auto o : {o1, o2, o3}) s.loads[o] = Viscous{1.0};
      s.duration = 0.5;
      break;
    case Demo3ood::output_driven:
      s.drive = InputLocked{input};
      s.sources[o1] = FlowSource{3.0};
      for (auto o : {o2, o3}) s.loads[o] = Viscous{1.0};
      s.duration = 0.5;
      break;
    case Demo3ood::torque_driven:
      s.drive = TorqueDriven{input, 3.0};
      for (auto o : {o1, o2, o3}) s.loads[o] = Viscous{1.0};
      s.duration = 1.0;
      break;
  }
  return s;
}

}  // namespace gearnet::cli
