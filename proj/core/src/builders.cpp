#include "gearnet/builders.hpp"

#include <array>
#include <cmath>
#include <string>

namespace gearnet {
namespace {

void require_inertia(double value, const char* what) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ValidationError(std::string(what) + " must be finite and >= 0");
  }
}

std::string indexed(const char* prefix, int i) { return prefix + std::to_string(i); }

}  // namespace

void check(const GearParams& params) {
  if (!(params.k > 0.0) || !std::isfinite(params.k)) throw ValidationError("gear params: k must be > 0");
  if (!(params.j > 0.0) || !std::isfinite(params.j)) throw ValidationError("gear params: j must be > 0");
  require_inertia(params.input_inertia, "input_inertia");
  require_inertia(params.ring_inertia, "ring_inertia");
  require_inertia(params.inner_side_inertia, "inner_side_inertia");
  require_inertia(params.side_inertia, "side_inertia");
  require_inertia(params.output_inertia, "output_inertia");
}

MechanismGraph build_two_output_diff(double ring_inertia, double side_inertia) {
  require_inertia(ring_inertia, "ring_inertia");
  require_inertia(side_inertia, "side_inertia");
  MechanismGraph g;
  g.set_family("2od");
  const ShaftId r = g.add_shaft("R", ring_inertia, Role::ring);
  const ShaftId a = g.add_shaft("S1", side_inertia, Role::side);
  const ShaftId b = g.add_shaft("S2", side_inertia, Role::side);
  g.add_element(Differential{r, a, b}, "D1");
  for (auto id : {r, a, b}) g.add_external(id);
  g.finalize();
  return g;
}

MechanismGraph build_3ood(const GearParams& p) {
  check(p);
  MechanismGraph g;
  g.set_family("3ood");
  const ShaftId input = g.add_shaft("I", p.input_inertia, Role::input);
  std::array<ShaftId, 7> ring{};
  std::array<ShaftId, 13> side{};
  std::array<ShaftId, 4> out{};
  for (int i = 1; i <= 3; ++i) ring[i] = g.add_shaft(indexed("R", i), p.ring_inertia, Role::ring);
  for (int i = 1; i <= 12; ++i) {
    side[i] = g.add_shaft(indexed("S", i), i <= 6 ? p.inner_side_inertia : p.side_inertia, Role::side);
  }
  for (int i = 4; i <= 6; ++i) ring[i] = g.add_shaft(indexed("R", i), p.ring_inertia, Role::ring);
  for (int i = 1; i <= 3; ++i) out[i] = g.add_shaft(indexed("O", i), p.output_inertia, Role::output);

  for (int i = 1; i <= 3; ++i) g.add_element(WormPair{input, ring[i], p.k, true}, indexed("W", i));
  for (int i = 1; i <= 3; ++i) g.add_element(Differential{ring[i], side[2 * i - 1], side[2 * i]}, indexed("D", i));
  const std::array<std::pair<int, int>, 6> couplings{{{1, 7}, {2, 12}, {3, 8}, {4, 9}, {5, 11}, {6, 10}}};
  for (int c = 0; c < 6; ++c) {
    g.add_element(RigidCoupling{side[couplings[c].first], side[couplings[c].second], 1}, indexed("C", c + 1));
  }
  for (int i = 4; i <= 6; ++i) {
    g.add_element(Differential{ring[i], side[2 * i - 1], side[2 * i]}, indexed("D", i));
  }
  for (int i = 1; i <= 3; ++i) g.add_element(FixedRatio{ring[i + 3], out[i], p.j}, indexed("J", i));

  g.add_external(input);
  for (int i = 1; i <= 3; ++i) g.add_external(out[i]);
  g.finalize();
  return g;
}

MechanismGraph build_initial_design(const GearParams& p) {
  check(p);
  MechanismGraph g;
  g.set_family("initial");
  const ShaftId input = g.add_shaft("I", p.input_inertia, Role::input);
  std::array<ShaftId, 4> ring{};
  std::array<ShaftId, 7> side{};
  std::array<ShaftId, 4> out{};
  for (int i = 1; i <= 3; ++i) ring[i] = g.add_shaft(indexed("R", i), p.ring_inertia, Role::ring);
  for (int i = 1; i <= 6; ++i) side[i] = g.add_shaft(indexed("SG", i), p.side_inertia, Role::side);
  for (int i = 1; i <= 3; ++i) out[i] = g.add_shaft(indexed("X", i), p.output_inertia, Role::output);

  for (int i = 1; i <= 3; ++i) g.add_element(WormPair{input, ring[i], p.k, true}, indexed("W", i));
  for (int i = 1; i <= 3; ++i) g.add_element(Differential{ring[i], side[2 * i - 1], side[2 * i]}, indexed("D", i));
  // Output Xn carries the adjacent side gears SG(2n) and SG(2n+1), wrapping around.
  for (int n = 1; n <= 3; ++n) {
    const int first = 2 * n;
    const int second = n == 3 ? 1 : 2 * n + 1;
    g.add_element(RigidCoupling{out[n], side[first], 1}, "C" + std::to_string(2 * n - 1));
    g.add_element(RigidCoupling{out[n], side[second], 1}, "C" + std::to_string(2 * n));
  }

  g.add_external(input);
  for (int i = 1; i <= 3; ++i) g.add_external(out[i]);
  g.finalize();
  return g;
}

MechanismGraph build_2_2d(const TwoTwoParams& p) {
  require_inertia(p.root_inertia, "root_inertia");
  require_inertia(p.intermediate_inertia, "intermediate_inertia");
  require_inertia(p.leaf_inertia, "leaf_inertia");
  MechanismGraph g;
  g.set_family("2-2d");
  const ShaftId root = g.add_shaft("root", p.root_inertia, Role::input);
  const ShaftId l = g.add_shaft("L", p.intermediate_inertia, Role::intermediate);
  const ShaftId r = g.add_shaft("R", p.intermediate_inertia, Role::intermediate);
  const ShaftId a = g.add_shaft("A", p.leaf_inertia, Role::output);
  const ShaftId b = g.add_shaft("B", p.leaf_inertia, Role::output);
  const ShaftId c = g.add_shaft("C", p.leaf_inertia, Role::output);
  const ShaftId d = g.add_shaft("D", p.leaf_inertia, Role::output);
  g.add_element(Differential{root, l, r}, "D_root");
  g.add_element(Differential{l, a, b}, "D_L");
  g.add_element(Differential{r, c, d}, "D_R");
  for (auto id : {root, a, b, c, d}) g.add_external(id);
  g.finalize();
  return g;
}

MechanismGraph build_multi_axle(double rho, double inertia) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("multi-axle: rho must be > 0");
  require_inertia(inertia, "inertia");
  MechanismGraph g;
  g.set_family("multi-axle");
  const ShaftId input = g.add_shaft("I", inertia, Role::input);
  const ShaftId x = g.add_shaft("X", inertia, Role::output);
  const ShaftId t1 = g.add_shaft("T1", inertia, Role::intermediate);
  const ShaftId y = g.add_shaft("Y", inertia, Role::output);
  const ShaftId t2 = g.add_shaft("T2", inertia, Role::intermediate);
  const ShaftId z = g.add_shaft("Z", inertia, Role::output);
  g.add_element(Planetary{t1, x, input, rho}, "P1");
  g.add_element(Planetary{t2, y, t1, rho}, "P2");
  g.add_element(Planetary{t1, z, t2, rho}, "P3");
  for (auto id : {input, x, y, z}) g.add_external(id);
  g.finalize();
  return g;
}

std::vector<std::string_view> builder_names() { return {"2od", "3ood", "initial", "2-2d", "multi-axle"}; }

MechanismGraph build_named(std::string_view name, const GearParams& params) {
  if (name == "2od") return build_two_output_diff();
  if (name == "3ood") return build_3ood(params);
  if (name == "initial") return build_initial_design(params);
  if (name == "2-2d") return build_2_2d();
  if (name == "multi-axle") return build_multi_axle();
  throw ValidationError("unknown mechanism '" + std::string(name) + "' (expected 2od, 3ood, initial, 2-2d or multi-axle)");
}

}  // namespace gearnet
