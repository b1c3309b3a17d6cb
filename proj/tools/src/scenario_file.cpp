#include "gearnet/cli/scenario_file.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gearnet/builders.hpp"

namespace gearnet::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string position(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

void only(const json& object, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) throw DescriptionError(path, "expected an object");
  for (const auto& [key, _] : object.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw DescriptionError(path + "/" + key, "unknown field");
  }
}

const json& need(const json& object, const std::string& path, const char* key) {
  const auto it = object.find(key);
  if (it == object.end()) throw DescriptionError(path + "/" + key, "missing required field");
  return *it;
}

double num(const json& value, const std::string& path) {
  if (!value.is_number()) throw DescriptionError(path, "expected a number");
  return value.get<double>();
}

std::string str(const json& value, const std::string& path) {
  if (!value.is_string()) throw DescriptionError(path, "expected a string");
  return value.get<std::string>();
}

// "value": constant or "series": [[t, v], ...], exactly one of them.
TimeFunction time_function(const json& object, const std::string& path) {
  const bool has_value = object.contains("value");
  const bool has_series = object.contains("series");
  if (has_value == has_series) throw DescriptionError(path, "expected exactly one of 'value' or 'series'");
  if (has_value) return TimeFunction::constant(num(object["value"], path + "/value"));
  const json& series = object["series"];
  if (!series.is_array() || series.empty()) throw DescriptionError(path + "/series", "expected a non-empty array");
  std::vector<std::pair<double, double>> samples;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::string at = path + "/series/" + std::to_string(i);
    if (!series[i].is_array() || series[i].size() != 2) throw DescriptionError(at, "expected [t, value]");
    samples.emplace_back(num(series[i][0], at + "/0"), num(series[i][1], at + "/1"));
  }
  try {
    return TimeFunction::piecewise_linear(std::move(samples));
  } catch (const ValidationError& err) {
    throw DescriptionError(path + "/series", err.what());
  }
}

double param(const json& params, const std::string& path, const char* key, double fallback) {
  return params.contains(key) ? num(params[key], path + "/" + key) : fallback;
}

MechanismGraph from_builder(const json& m, const std::string& path) {
  const std::string name = str(need(m, path, "builder"), path + "/builder");
  const json params = m.contains("params") ? m["params"] : json::object();
  const std::string at = path + "/params";
  try {
    if (name == "3ood" || name == "initial") {
      only(params, at, {"k", "j", "input_inertia", "ring_inertia", "inner_side_inertia", "side_inertia", "output_inertia"});
      GearParams p;
      p.k = param(params, at, "k", p.k);
      p.j = param(params, at, "j", p.j);
      p.input_inertia = param(params, at, "input_inertia", p.input_inertia);
      p.ring_inertia = param(params, at, "ring_inertia", p.ring_inertia);
      p.inner_side_inertia = param(params, at, "inner_side_inertia", p.inner_side_inertia);
      p.side_inertia = param(params, at, "side_inertia", p.side_inertia);
      p.output_inertia = param(params, at, "output_inertia", p.output_inertia);
      return name == "3ood" ? build_3ood(p) : build_initial_design(p);
    }
    if (name == "2od") {
      only(params, at, {"ring_inertia", "side_inertia"});
      return build_two_output_diff(param(params, at, "ring_inertia", 1.0), param(params, at, "side_inertia", 1.0));
    }
    if (name == "2-2d") {
      only(params, at, {"root_inertia", "intermediate_inertia", "leaf_inertia"});
      TwoTwoParams p;
      p.root_inertia = param(params, at, "root_inertia", p.root_inertia);
      p.intermediate_inertia = param(params, at, "intermediate_inertia", p.intermediate_inertia);
      p.leaf_inertia = param(params, at, "leaf_inertia", p.leaf_inertia);
      return build_2_2d(p);
    }
    if (name == "multi-axle") {
      only(params, at, {"rho", "inertia"});
      return build_multi_axle(param(params, at, "rho", 2.0), param(params, at, "inertia", 1.0));
    }
  } catch (const DescriptionError&) {
    throw;
  } catch (const ValidationError& err) {
    throw DescriptionError(at, err.what());
  }
  throw DescriptionError(path + "/builder", "unknown builder '" + name + "'");
}

MechanismGraph mechanism(const json& m, const fs::path& base) {
  const std::string path = "/mechanism";
  only(m, path, {"builder", "params", "description", "file"});
  const int forms = int(m.contains("builder")) + int(m.contains("description")) + int(m.contains("file"));
  if (forms != 1) throw DescriptionError(path, "expected exactly one of 'builder', 'description' or 'file'");
  if (m.contains("params") && !m.contains("builder")) throw DescriptionError(path + "/params", "only valid with 'builder'");
  if (m.contains("builder")) return from_builder(m, path);
  if (m.contains("description")) {
    try {
      return parse_description(m["description"].dump());
    } catch (const DescriptionError& err) {
      throw DescriptionError(path + "/description" + err.path(),
                             std::string(err.what()).substr(err.path().size() + 2));
    }
  }
  fs::path file = str(m["file"], path + "/file");
  if (file.is_relative()) file = base / file;
  return load_description(file);
}

ShaftId shaft(const MechanismGraph& graph, const std::string& name, const std::string& path) {
  const auto id = graph.find_shaft(name);
  if (!id) throw DescriptionError(path, "unknown shaft '" + name + "'");
  return *id;
}

Load load(const json& l, const std::string& path) {
  const std::string type = str(need(l, path, "type"), path + "/type");
  if (type == "free") {
    only(l, path, {"type"});
    return Free{};
  }
  if (type == "viscous") {
    only(l, path, {"type", "b"});
    return Viscous{num(need(l, path, "b"), path + "/b")};
  }
  if (type == "resistive") {
    only(l, path, {"type", "tau_r"});
    return ConstantResistive{num(need(l, path, "tau_r"), path + "/tau_r")};
  }
  if (type == "locked") {
    only(l, path, {"type"});
    return Locked{};
  }
  if (type == "torque") {
    only(l, path, {"type", "value", "series"});
    return AppliedTorque{time_function(l, path)};
  }
  throw DescriptionError(path + "/type", "unknown load type '" + type + "'");
}

Integrator integrator(const std::string& text, const std::string& path) {
  if (text == "semi-implicit-euler") return Integrator::semi_implicit_euler;
  if (text == "rk4") return Integrator::rk4;
  throw DescriptionError(path, "unknown integrator '" + text + "' (expected semi-implicit-euler or rk4)");
}

fs::path output_path(const json& value, const std::string& path, const fs::path& base) {
  fs::path p = str(value, path);
  return p.is_relative() ? base / p : p;
}

ScenarioFile from_json(const json& doc, const fs::path& base) {
  only(doc, "", {"mechanism", "drive", "sources", "loads", "initial", "sim", "outputs"});
  ScenarioFile out;
  Scenario& s = out.scenario;
  auto graph = std::make_shared<MechanismGraph>(mechanism(need(doc, "", "mechanism"), base));
  s.graph = graph;

  const json& drive = need(doc, "", "drive");
  only(drive, "/drive", {"mode", "shaft", "value", "series"});
  const std::string mode = str(need(drive, "/drive", "mode"), "/drive/mode");
  const ShaftId input = shaft(*graph, str(need(drive, "/drive", "shaft"), "/drive/shaft"), "/drive/shaft");
  if (mode == "velocity") {
    s.drive = VelocityDriven{input, time_function(drive, "/drive")};
  } else if (mode == "torque") {
    s.drive = TorqueDriven{input, time_function(drive, "/drive")};
  } else if (mode == "locked") {
    if (drive.contains("value") || drive.contains("series")) {
      throw DescriptionError("/drive", "a locked drive takes no value");
    }
    s.drive = InputLocked{input};
  } else {
    throw DescriptionError("/drive/mode", "unknown drive mode '" + mode + "' (expected velocity, torque or locked)");
  }

  if (doc.contains("sources")) {
    const json& sources = doc["sources"];
    if (!sources.is_object()) throw DescriptionError("/sources", "expected an object");
    for (const auto& [name, spec] : sources.items()) {
      const std::string path = "/sources/" + name;
      only(spec, path, {"type", "value", "series"});
      const ShaftId id = shaft(*graph, name, path);
      const std::string type = str(need(spec, path, "type"), path + "/type");
      if (type == "flow") {
        s.sources[id] = FlowSource{time_function(spec, path)};
      } else if (type == "effort") {
        s.sources[id] = EffortSource{time_function(spec, path)};
      } else {
        throw DescriptionError(path + "/type", "unknown source type '" + type + "' (expected flow or effort)");
      }
    }
  }
  if (doc.contains("loads")) {
    const json& loads = doc["loads"];
    if (!loads.is_object()) throw DescriptionError("/loads", "expected an object");
    for (const auto& [name, spec] : loads.items()) {
      const std::string path = "/loads/" + name;
      if (!spec.is_object()) throw DescriptionError(path, "expected an object");
      s.loads[shaft(*graph, name, path)] = load(spec, path);
    }
  }
  if (doc.contains("initial")) {
    const json& initial = doc["initial"];
    if (!initial.is_object()) throw DescriptionError("/initial", "expected an object");
    for (const auto& [name, value] : initial.items()) {
      const std::string path = "/initial/" + name;
      s.initial_velocity[shaft(*graph, name, path)] = num(value, path);
    }
  }
  if (doc.contains("sim")) {
    const json& sim = doc["sim"];
    only(sim, "/sim", {"duration", "dt", "epsilon_inertia", "integrator", "record_torques"});
    if (sim.contains("duration")) s.duration = num(sim["duration"], "/sim/duration");
    if (sim.contains("dt")) s.timestep = num(sim["dt"], "/sim/dt");
    if (sim.contains("epsilon_inertia")) s.epsilon_inertia = num(sim["epsilon_inertia"], "/sim/epsilon_inertia");
    if (sim.contains("integrator")) s.integrator = integrator(str(sim["integrator"], "/sim/integrator"), "/sim/integrator");
    if (sim.contains("record_torques")) {
      if (!sim["record_torques"].is_boolean()) throw DescriptionError("/sim/record_torques", "expected a boolean");
      s.record_torques = sim["record_torques"].get<bool>();
    }
  }
  if (doc.contains("outputs")) {
    const json& outputs = doc["outputs"];
    only(outputs, "/outputs", {"trajectory", "report"});
    if (outputs.contains("trajectory")) out.trajectory_path = output_path(outputs["trajectory"], "/outputs/trajectory", base);
    if (outputs.contains("report")) out.report_path = output_path(outputs["report"], "/outputs/report", base);
  }

  try {
    validate(s);
  } catch (const PreconditionError& err) {
    throw DescriptionError("", err.what());
  }
  return out;
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& err) {
    throw DescriptionError("", "malformed JSON at " + position(text, err.byte == 0 ? 0 : err.byte - 1));
  }
  return from_json(doc, base_dir);
}

ScenarioFile load_scenario(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open scenario file '" + file.string() + "': file not found or unreadable");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_scenario(buffer.str(), file.parent_path());
  } catch (const DescriptionError& err) {
    throw DescriptionError(err.path(), file.string() + ": " + std::string(err.what()).substr(err.path().size() + 2));
  }
}

std::shared_ptr<const MechanismGraph> resolve_mechanism(std::string_view name_or_path) {
  for (auto name : builder_names()) {
    if (name == name_or_path) return std::make_shared<MechanismGraph>(build_named(name));
  }
  const fs::path file(name_or_path);
  if (!fs::exists(file)) {
    throw ValidationError("unknown mechanism '" + std::string(name_or_path) +
                          "': not a builder name (2od, 3ood, initial, 2-2d, multi-axle) or an existing file");
  }
  return std::make_shared<MechanismGraph>(load_description(file));
}

}  // namespace gearnet::cli
