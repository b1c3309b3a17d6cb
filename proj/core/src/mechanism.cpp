#include "gearnet/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace gearnet {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Union-find over shaft indices.
class Components {
 public:
  explicit Components(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }
  void join(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

void check_params(const ElementKind& kind, std::string_view name) {
  const auto fail = [&](const std::string& what) {
    throw ValidationError("element '" + std::string(name) + "': " + what);
  };
  std::visit(Overloaded{
                 [](const Differential&) {},
                 [&](const WormPair& w) {
                   if (!(w.ratio_k > 0.0)) fail("worm ratio k must be > 0");
                 },
                 [&](const FixedRatio& r) {
                   if (r.ratio == 0.0 || !std::isfinite(r.ratio)) fail("fixed ratio must be nonzero and finite");
                 },
                 [&](const RigidCoupling& c) {
                   if (c.sign != 1 && c.sign != -1) fail("coupling sign must be +1 or -1");
                 },
                 [&](const Planetary& p) {
                   if (!(p.rho > 0.0)) fail("planetary rho must be > 0");
                 },
             },
             kind);
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::input: return "input";
    case Role::output: return "output";
    case Role::ring: return "ring";
    case Role::side: return "side";
    case Role::intermediate: return "intermediate";
  }
  return "intermediate";
}

std::optional<Role> parse_role(std::string_view text) {
  for (Role r : {Role::input, Role::output, Role::ring, Role::side, Role::intermediate}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

std::vector<Port> ports(const ElementKind& kind) {
  return std::visit(
      Overloaded{
          [](const Differential& d) {
            return std::vector<Port>{{"ring", d.ring, 2.0}, {"side_a", d.side_a, -1.0}, {"side_b", d.side_b, -1.0}};
          },
          [](const WormPair& w) {
            return std::vector<Port>{{"worm", w.worm, -1.0 / w.ratio_k}, {"wheel", w.wheel, 1.0}};
          },
          [](const FixedRatio& r) {
            return std::vector<Port>{{"a", r.a, -r.ratio}, {"b", r.b, 1.0}};
          },
          [](const RigidCoupling& c) {
            return std::vector<Port>{{"a", c.a, -static_cast<double>(c.sign)}, {"b", c.b, 1.0}};
          },
          [](const Planetary& p) {
            return std::vector<Port>{{"sun", p.sun, 1.0}, {"ring", p.ring, p.rho}, {"carrier", p.carrier, -(1.0 + p.rho)}};
          },
      },
      kind);
}

std::string_view kind_name(const ElementKind& kind) {
  return std::visit(Overloaded{
                        [](const Differential&) { return std::string_view("differential"); },
                        [](const WormPair&) { return std::string_view("worm_pair"); },
                        [](const FixedRatio&) { return std::string_view("fixed_ratio"); },
                        [](const RigidCoupling&) { return std::string_view("rigid_coupling"); },
                        [](const Planetary&) { return std::string_view("planetary"); },
                    },
                    kind);
}

bool has_errors(const Diagnostics& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::error; });
}

std::string format(const Diagnostics& diagnostics) {
  std::ostringstream out;
  for (const auto& d : diagnostics) {
    out << (d.severity == Diagnostic::Severity::error ? "error" : "warning") << " [" << d.code << "] " << d.message
        << '\n';
  }
  return out.str();
}

ShaftId MechanismGraph::add_shaft(std::string name, double inertia, Role role) {
  require_mutable("add_shaft");
  if (name.empty()) throw ValidationError("shaft name must not be empty");
  if (find_shaft(name)) throw ValidationError("duplicate shaft name '" + name + "'");
  if (!(inertia >= 0.0) || !std::isfinite(inertia)) {
    throw ValidationError("shaft '" + name + "': inertia must be finite and >= 0");
  }
  const ShaftId id{shafts_.size()};
  shafts_.push_back(Shaft{id, std::move(name), inertia, role});
  return id;
}

ElementId MechanismGraph::add_element(ElementKind kind, std::string name) {
  require_mutable("add_element");
  const ElementId id{elements_.size()};
  if (name.empty()) name = std::string(kind_name(kind)) + "_" + std::to_string(id.value);
  if (find_element(name)) throw ValidationError("duplicate element name '" + name + "'");

  const auto element_ports = ports(kind);
  for (const auto& p : element_ports) check_reference(p.shaft, name);
  for (std::size_t i = 0; i < element_ports.size(); ++i) {
    for (std::size_t j = i + 1; j < element_ports.size(); ++j) {
      if (element_ports[i].shaft == element_ports[j].shaft) {
        throw ValidationError("element '" + name + "': shaft '" + shafts_[element_ports[i].shaft.value].name +
                              "' used on ports '" + std::string(element_ports[i].name) + "' and '" +
                              std::string(element_ports[j].name) + "'");
      }
    }
  }
  check_params(kind, name);
  elements_.push_back(Element{id, std::move(name), std::move(kind)});
  return id;
}

void MechanismGraph::add_external(ShaftId shaft) {
  require_mutable("add_external");
  check_reference(shaft, "external list");
  if (std::find(external_.begin(), external_.end(), shaft) != external_.end()) {
    throw ValidationError("shaft '" + shafts_[shaft.value].name + "' listed as external twice");
  }
  external_.push_back(shaft);
}

void MechanismGraph::set_family(std::string family) {
  require_mutable("set_family");
  family_ = std::move(family);
}

void MechanismGraph::finalize() {
  if (finalized_) return;
  diagnostics_ = validate(*this);
  if (has_errors(diagnostics_)) throw GraphValidationError(diagnostics_);
  finalized_ = true;
}

const Shaft& MechanismGraph::shaft(ShaftId id) const {
  if (id.value >= shafts_.size()) throw ValidationError("unknown shaft id " + std::to_string(id.value));
  return shafts_[id.value];
}

const Element& MechanismGraph::element(ElementId id) const {
  if (id.value >= elements_.size()) throw ValidationError("unknown element id " + std::to_string(id.value));
  return elements_[id.value];
}

std::optional<ShaftId> MechanismGraph::find_shaft(std::string_view name) const {
  for (const auto& s : shafts_) {
    if (s.name == name) return s.id;
  }
  return std::nullopt;
}

std::optional<ElementId> MechanismGraph::find_element(std::string_view name) const {
  for (const auto& e : elements_) {
    if (e.name == name) return e.id;
  }
  return std::nullopt;
}

ShaftId MechanismGraph::shaft_id(std::string_view name) const {
  if (auto id = find_shaft(name)) return *id;
  throw ValidationError("unknown shaft '" + std::string(name) + "'");
}

ElementId MechanismGraph::element_id(std::string_view name) const {
  if (auto id = find_element(name)) return *id;
  throw ValidationError("unknown element '" + std::string(name) + "'");
}

void MechanismGraph::require_mutable(std::string_view operation) const {
  if (finalized_) throw PreconditionError(std::string(operation) + ": graph is finalized");
}

void MechanismGraph::check_reference(ShaftId id, std::string_view element) const {
  if (id.value >= shafts_.size()) {
    throw ValidationError(std::string(element) + ": dangling shaft reference #" + std::to_string(id.value));
  }
}

Diagnostics validate(const MechanismGraph& graph) {
  Diagnostics out;
  const auto error = [&](std::string code, std::string message) {
    out.push_back({Diagnostic::Severity::error, std::move(code), std::move(message)});
  };
  const std::size_t n = graph.shaft_count();
  if (n == 0) {
    error("empty", "graph has no shafts");
    return out;
  }

  Components components(n);
  for (const auto& e : graph.elements()) {
    const auto element_ports = ports(e.kind);
    bool dangling = false;
    for (const auto& p : element_ports) {
      if (p.shaft.value >= n) {
        error("dangling-reference", "element '" + e.name + "' port '" + std::string(p.name) + "' refers to shaft #" +
                                        std::to_string(p.shaft.value));
        dangling = true;
      }
    }
    if (dangling) continue;
    for (std::size_t i = 0; i < element_ports.size(); ++i) {
      for (std::size_t j = i + 1; j < element_ports.size(); ++j) {
        if (element_ports[i].shaft == element_ports[j].shaft) {
          error("repeated-port", "element '" + e.name + "' uses shaft '" + graph.shaft(element_ports[i].shaft).name +
                                     "' on more than one port");
        }
      }
      components.join(element_ports[i].shaft.value, element_ports.front().shaft.value);
    }
  }

  std::vector<std::vector<std::string>> groups;
  std::vector<std::ptrdiff_t> group_of_root(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = components.find(i);
    if (group_of_root[root] < 0) {
      group_of_root[root] = static_cast<std::ptrdiff_t>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(group_of_root[root])].push_back(graph.shafts()[i].name);
  }
  if (groups.size() > 1) {
    std::ostringstream msg;
    msg << "graph has " << groups.size() << " disconnected components:";
    for (const auto& g : groups) {
      msg << " {";
      for (std::size_t i = 0; i < g.size(); ++i) msg << (i ? ", " : "") << g[i];
      msg << '}';
    }
    error("disconnected", msg.str());
  }

  for (std::size_t i = 0; i < graph.external().size(); ++i) {
    const ShaftId id = graph.external()[i];
    if (id.value >= n) error("dangling-reference", "external list refers to shaft #" + std::to_string(id.value));
  }

  const bool all_massless =
      std::all_of(graph.shafts().begin(), graph.shafts().end(), [](const Shaft& s) { return s.inertia == 0.0; });
  if (all_massless) {
    out.push_back({Diagnostic::Severity::warning, "all-massless",
                   "every shaft has zero inertia; simulation substitutes epsilon_inertia on each"});
  }
  return out;
}

}  // namespace gearnet
