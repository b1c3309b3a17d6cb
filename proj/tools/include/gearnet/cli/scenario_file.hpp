#pragma once

// Scenario document (JSON), one experiment per file:
//   {
//     "mechanism": {"builder": "3ood", "params": {...}}
//                | {"description": {<mechanism description>}}
//                | {"file": "<mechanism description path>"},
//     "drive":   {"mode": "velocity" | "torque" | "locked", "shaft": "I",
//                 "value": 20 | "series": [[t, v], ...]},
//     "sources": {"<shaft>": {"type": "flow" | "effort", "value" | "series"}},
//     "loads":   {"<shaft>": {"type": "free" | "viscous" | "resistive" |
//                             "locked" | "torque", ...}},
//     "initial": {"<shaft>": rad/s},
//     "sim":     {"duration", "dt", "epsilon_inertia",
//                 "integrator": "semi-implicit-euler" | "rk4", "record_torques"},
//     "outputs": {"trajectory": "<csv path>", "report": "<json path>"}
//   }
// Load parameters: viscous {"b"}, resistive {"tau_r"}, torque {"value" | "series"}.
// Builder params: 3ood / initial take k, j and the GearParams inertias;
// 2od takes ring_inertia, side_inertia; 2-2d takes root_inertia,
// intermediate_inertia, leaf_inertia; multi-axle takes rho, inertia.
// Relative paths are resolved against the scenario file's directory.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "gearnet/description_io.hpp"
#include "gearnet/dynamics.hpp"

namespace gearnet::cli {

struct ScenarioFile {
  Scenario scenario;
  std::optional<std::filesystem::path> trajectory_path;
  std::optional<std::filesystem::path> report_path;
};

/// Throws DescriptionError (a ValidationError) with a JSON pointer or a
/// line/column for malformed input.
ScenarioFile parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
ScenarioFile load_scenario(const std::filesystem::path& file);

/// "3ood", "2od", ... with default parameters, or a description file path.
std::shared_ptr<const MechanismGraph> resolve_mechanism(std::string_view name_or_path);

}  // namespace gearnet::cli
