#include "gearnet/description_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace gearnet {
namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string describe_offset(std::string_view text, std::size_t byte) {
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

void reject_unknown(const json& object, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) throw DescriptionError(path, "expected an object");
  for (const auto& [key, _] : object.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw DescriptionError(path + "/" + key, "unknown field");
  }
}

const json& require(const json& object, const std::string& path, const char* key) {
  if (!object.is_object()) throw DescriptionError(path, "expected an object");
  const auto it = object.find(key);
  if (it == object.end()) throw DescriptionError(path + "/" + key, "missing required field");
  return *it;
}

double number(const json& value, const std::string& path) {
  if (!value.is_number()) throw DescriptionError(path, "expected a number");
  return value.get<double>();
}

std::string string(const json& value, const std::string& path) {
  if (!value.is_string()) throw DescriptionError(path, "expected a string");
  return value.get<std::string>();
}

struct KindSpec {
  std::vector<std::string_view> ports;
  std::vector<std::string_view> params;
};

const std::map<std::string_view, KindSpec>& kind_specs() {
  static const std::map<std::string_view, KindSpec> specs{
      {"differential", {{"ring", "side_a", "side_b"}, {}}},
      {"worm_pair", {{"worm", "wheel"}, {"k", "self_locking"}}},
      {"fixed_ratio", {{"a", "b"}, {"ratio"}}},
      {"rigid_coupling", {{"a", "b"}, {"sign"}}},
      {"planetary", {{"sun", "ring", "carrier"}, {"rho"}}},
  };
  return specs;
}

ElementKind element_from_json(const json& e, const std::string& path, const MechanismGraph& graph) {
  const std::string kind = string(require(e, path, "kind"), path + "/kind");
  const auto spec_it = kind_specs().find(kind);
  if (spec_it == kind_specs().end()) throw DescriptionError(path + "/kind", "unknown element kind '" + kind + "'");
  const KindSpec& spec = spec_it->second;

  const json& ports_json = require(e, path, "ports");
  if (!ports_json.is_object()) throw DescriptionError(path + "/ports", "expected an object");
  std::map<std::string_view, ShaftId> port;
  for (const auto& [key, value] : ports_json.items()) {
    const std::string field = path + "/ports/" + key;
    bool known = false;
    for (auto p : spec.ports) known = known || key == p;
    if (!known) throw DescriptionError(field, "unknown port for " + kind);
    const std::string shaft = string(value, field);
    const auto id = graph.find_shaft(shaft);
    if (!id) throw DescriptionError(field, "unknown shaft '" + shaft + "'");
    port.emplace(*std::find(spec.ports.begin(), spec.ports.end(), key), *id);
  }
  for (auto p : spec.ports) {
    if (!port.count(p)) throw DescriptionError(path + "/ports/" + std::string(p), "missing port");
  }

  json params = json::object();
  if (e.contains("params")) {
    params = e.at("params");
    if (!params.is_object()) throw DescriptionError(path + "/params", "expected an object");
    for (const auto& [key, _] : params.items()) {
      bool known = false;
      for (auto p : spec.params) known = known || key == p;
      if (!known) throw DescriptionError(path + "/params/" + key, "unknown parameter for " + kind);
    }
  }
  const auto param = [&](const char* key) { return number(require(params, path + "/params", key), path + "/params/" + key); };

  if (kind == "differential") return Differential{port.at("ring"), port.at("side_a"), port.at("side_b")};
  if (kind == "worm_pair") {
    bool locking = true;
    if (params.contains("self_locking")) {
      if (!params["self_locking"].is_boolean()) throw DescriptionError(path + "/params/self_locking", "expected a boolean");
      locking = params["self_locking"].get<bool>();
    }
    return WormPair{port.at("worm"), port.at("wheel"), param("k"), locking};
  }
  if (kind == "fixed_ratio") return FixedRatio{port.at("a"), port.at("b"), param("ratio")};
  if (kind == "rigid_coupling") {
    int sign = 1;
    if (params.contains("sign")) {
      const double s = number(params["sign"], path + "/params/sign");
      if (s != 1.0 && s != -1.0) throw DescriptionError(path + "/params/sign", "sign must be +1 or -1");
      sign = static_cast<int>(s);
    }
    return RigidCoupling{port.at("a"), port.at("b"), sign};
  }
  return Planetary{port.at("sun"), port.at("ring"), port.at("carrier"), param("rho")};
}

MechanismGraph graph_from_json(const json& doc) {
  if (!doc.is_object()) throw DescriptionError("", "expected a JSON object at the top level");
  reject_unknown(doc, "", {"family", "shafts", "elements", "external"});

  MechanismGraph graph;
  if (doc.contains("family")) graph.set_family(string(doc["family"], "/family"));

  const json& shafts = require(doc, "", "shafts");
  if (!shafts.is_array()) throw DescriptionError("/shafts", "expected an array");
  for (std::size_t i = 0; i < shafts.size(); ++i) {
    const std::string path = "/shafts/" + std::to_string(i);
    const json& s = shafts[i];
    reject_unknown(s, path, {"name", "inertia", "role"});
    const std::string name = string(require(s, path, "name"), path + "/name");
    const double inertia = s.contains("inertia") ? number(s["inertia"], path + "/inertia") : 0.0;
    Role role = Role::intermediate;
    if (s.contains("role")) {
      const std::string text = string(s["role"], path + "/role");
      const auto parsed = parse_role(text);
      if (!parsed) throw DescriptionError(path + "/role", "unknown role '" + text + "'");
      role = *parsed;
    }
    try {
      graph.add_shaft(name, inertia, role);
    } catch (const DescriptionError&) {
      throw;
    } catch (const ValidationError& err) {
      throw DescriptionError(path, err.what());
    }
  }

  if (doc.contains("elements")) {
    const json& elements = doc["elements"];
    if (!elements.is_array()) throw DescriptionError("/elements", "expected an array");
    for (std::size_t i = 0; i < elements.size(); ++i) {
      const std::string path = "/elements/" + std::to_string(i);
      const json& e = elements[i];
      reject_unknown(e, path, {"kind", "name", "ports", "params"});
      ElementKind kind = element_from_json(e, path, graph);
      const std::string name = e.contains("name") ? string(e["name"], path + "/name") : std::string{};
      try {
        graph.add_element(std::move(kind), name);
      } catch (const ValidationError& err) {
        throw DescriptionError(path, err.what());
      }
    }
  }

  if (doc.contains("external")) {
    const json& external = doc["external"];
    if (!external.is_array()) throw DescriptionError("/external", "expected an array");
    for (std::size_t i = 0; i < external.size(); ++i) {
      const std::string path = "/external/" + std::to_string(i);
      const std::string name = string(external[i], path);
      const auto id = graph.find_shaft(name);
      if (!id) throw DescriptionError(path, "unknown shaft '" + name + "'");
      try {
        graph.add_external(*id);
      } catch (const ValidationError& err) {
        throw DescriptionError(path, err.what());
      }
    }
  }

  graph.finalize();
  return graph;
}

}  // namespace

MechanismGraph parse_description(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& err) {
    throw DescriptionError("", "malformed JSON at " + describe_offset(text, err.byte == 0 ? 0 : err.byte - 1) + ": " +
                                   err.what());
  }
  return graph_from_json(doc);
}

MechanismGraph load_description(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open mechanism description '" + file.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_description(buffer.str());
}

std::string write_description(const MechanismGraph& graph) {
  json doc = json::object();
  if (!graph.family().empty()) doc["family"] = graph.family();
  doc["shafts"] = json::array();
  for (const auto& s : graph.shafts()) {
    doc["shafts"].push_back({{"name", s.name}, {"inertia", s.inertia}, {"role", std::string(to_string(s.role))}});
  }
  doc["elements"] = json::array();
  for (const auto& e : graph.elements()) {
    json ports_json = json::object();
    for (const auto& p : ports(e.kind)) ports_json[std::string(p.name)] = graph.shaft(p.shaft).name;
    json params = std::visit(Overloaded{
                                 [](const Differential&) { return json::object(); },
                                 [](const WormPair& w) { return json{{"k", w.ratio_k}, {"self_locking", w.self_locking}}; },
                                 [](const FixedRatio& r) { return json{{"ratio", r.ratio}}; },
                                 [](const RigidCoupling& c) { return json{{"sign", c.sign}}; },
                                 [](const Planetary& p) { return json{{"rho", p.rho}}; },
                             },
                             e.kind);
    json element{{"kind", std::string(kind_name(e.kind))}, {"name", e.name}, {"ports", ports_json}};
    if (!params.empty()) element["params"] = params;
    doc["elements"].push_back(element);
  }
  doc["external"] = json::array();
  for (const auto id : graph.external()) doc["external"].push_back(graph.shaft(id).name);
  return doc.dump(2) + "\n";
}

}  // namespace gearnet
