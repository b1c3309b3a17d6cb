#pragma once

// Mechanism data model: rotating shafts joined by ideal, lossless gear
// elements. Each element contributes exactly one scalar velocity constraint
//   sum_p c_p * omega_p = 0
// over its ports, and its torque map is the transpose of that row: a
// multiplier lambda applies torque c_p * lambda to the shaft on port p, so
// the element never stores or dissipates power.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gearnet/errors.hpp"
#include "gearnet/ids.hpp"

namespace gearnet {

/// Descriptive tag only; no solver behaviour depends on it.
enum class Role { input, output, ring, side, intermediate };

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view text);

struct Shaft {
  ShaftId id;
  std::string name;
  double inertia = 0.0;  // kg m^2, zero means massless
  Role role = Role::intermediate;
};

/// Open differential junction: omega_ring = (omega_a + omega_b) / 2,
/// side torques each equal half the ring torque.
struct Differential {
  ShaftId ring;
  ShaftId side_a;
  ShaftId side_b;
};

/// Worm stage: omega_wheel = omega_worm / k. The self-locking flag is
/// metadata; the locked regime is selected by the drive mode.
struct WormPair {
  ShaftId worm;
  ShaftId wheel;
  double ratio_k = 1.0;
  bool self_locking = true;
};

/// omega_b = ratio * omega_a.
struct FixedRatio {
  ShaftId a;
  ShaftId b;
  double ratio = 1.0;
};

/// omega_b = sign * omega_a, sign in {+1, -1}.
struct RigidCoupling {
  ShaftId a;
  ShaftId b;
  int sign = 1;
};

/// Willis relation: omega_sun + rho * omega_ring = (1 + rho) * omega_carrier.
struct Planetary {
  ShaftId sun;
  ShaftId ring;
  ShaftId carrier;
  double rho = 1.0;
};

using ElementKind = std::variant<Differential, WormPair, FixedRatio, RigidCoupling, Planetary>;

struct Element {
  ElementId id;
  std::string name;
  ElementKind kind;
};

/// One port of an element and its coefficient in the element's constraint row.
struct Port {
  std::string_view name;
  ShaftId shaft;
  double coefficient;
};

/// Ports in a fixed per-kind order; this order also fixes CSV torque columns.
std::vector<Port> ports(const ElementKind& kind);
std::string_view kind_name(const ElementKind& kind);

struct Diagnostic {
  enum class Severity { warning, error };
  Severity severity = Severity::error;
  std::string code;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

bool has_errors(const Diagnostics& diagnostics);
std::string format(const Diagnostics& diagnostics);

/// Thrown by finalize() when validation reports errors; carries the full list.
class GraphValidationError : public ValidationError {
 public:
  explicit GraphValidationError(Diagnostics diagnostics)
      : ValidationError("mechanism graph failed validation:\n" + format(diagnostics)),
        diagnostics_(std::move(diagnostics)) {}
  const Diagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  Diagnostics diagnostics_;
};

class MechanismGraph {
 public:
  MechanismGraph() = default;

  /// Returns sequential ids starting at 0. Rejects duplicate names and
  /// negative inertia.
  ShaftId add_shaft(std::string name, double inertia, Role role = Role::intermediate);

  /// Rejects dangling shaft references, a shaft repeated across ports,
  /// invalid ratios and duplicate element names. An empty name is replaced
  /// by "<kind>_<index>".
  ElementId add_element(ElementKind kind, std::string name = {});

  void add_external(ShaftId shaft);
  void set_family(std::string family);

  /// Validates and freezes the graph. Warnings are kept in diagnostics().
  void finalize();
  bool finalized() const noexcept { return finalized_; }
  const Diagnostics& diagnostics() const noexcept { return diagnostics_; }

  std::span<const Shaft> shafts() const noexcept { return shafts_; }
  std::span<const Element> elements() const noexcept { return elements_; }
  std::span<const ShaftId> external() const noexcept { return external_; }
  std::size_t shaft_count() const noexcept { return shafts_.size(); }

  /// Builder family tag ("3ood", "2od", ...); empty for hand-made graphs.
  const std::string& family() const noexcept { return family_; }

  const Shaft& shaft(ShaftId id) const;
  const Element& element(ElementId id) const;
  std::optional<ShaftId> find_shaft(std::string_view name) const;
  std::optional<ElementId> find_element(std::string_view name) const;
  /// Throws ValidationError when the name is unknown.
  ShaftId shaft_id(std::string_view name) const;
  ElementId element_id(std::string_view name) const;

 private:
  void require_mutable(std::string_view operation) const;
  void check_reference(ShaftId id, std::string_view element) const;

  std::vector<Shaft> shafts_;
  std::vector<Element> elements_;
  std::vector<ShaftId> external_;
  std::string family_;
  Diagnostics diagnostics_;
  bool finalized_ = false;
};

/// Structural checks: dangling references, repeated ports, disconnected
/// components, external list sanity, and an all-massless warning.
Diagnostics validate(const MechanismGraph& graph);

}  // namespace gearnet
