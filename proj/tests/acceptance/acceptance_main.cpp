// One line per acceptance criterion; exit status is nonzero if any fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gearnet/builders.hpp"
#include "gearnet/cli/demos.hpp"
#include "gearnet/kinematics.hpp"
#include "gearnet/verification.hpp"
#include "oracles/rational_rank.hpp"
#include "oracles/reference_dynamics.hpp"
#include "support/symmetry.hpp"

using namespace gearnet;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double last(const Trajectory& t, const MechanismGraph& g, const char* shaft) {
  return t.velocity.back()[g.shaft_id(shaft).value];
}

double port(const Trajectory& t, std::size_t k, const char* element, const char* p) {
  return t.port_torque[k][*t.port_column(element, p)];
}

Outcome equal_load_speeds() {
  const auto s = cli::demo_3ood_scenario(cli::Demo3ood::equal_loads);
  const auto t = simulate(s);
  double worst = 0.0;
  for (auto o : {"O1", "O2", "O3"}) worst = std::max(worst, std::abs(last(t, *s.graph, o) - 2.0));
  return {worst < 1e-6, fmt("max |omega_O - 2| = %.3g", worst)};
}

Outcome random_output_sum() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int run = 0; run < 100; ++run) {
    GearParams p;
    p.k = 5.0 + 45.0 * u(rng);
    p.j = 0.5 + 3.0 * u(rng);
    Scenario s;
    s.graph = std::make_shared<const MechanismGraph>(build_3ood(p));
    const auto& g = *s.graph;
    const double drive = 40.0 * (u(rng) - 0.5);
    if (run % 2 == 0) {
      s.drive = VelocityDriven{g.shaft_id("I"), drive};
    } else {
      s.drive = TorqueDriven{g.shaft_id("I"), drive / 10.0};
    }
    for (auto o : {"O1", "O2", "O3"}) {
      if (u(rng) < 0.5) {
        s.loads[g.shaft_id(o)] = Viscous{0.1 + 3.0 * u(rng)};
      } else {
        s.loads[g.shaft_id(o)] = AppliedTorque{2.0 * (u(rng) - 0.5)};
      }
    }
    s.duration = 0.05;
    s.record_torques = false;
    const auto t = simulate(s);
    const auto i = g.shaft_id("I").value;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const auto& v = t.velocity[k];
      const double sum = v[g.shaft_id("O1").value] + v[g.shaft_id("O2").value] + v[g.shaft_id("O3").value];
      const double r = std::abs(sum - 3.0 * p.j * v[i] / p.k) / std::max(1.0, std::abs(v[i]));
      worst = std::max(worst, r);
    }
  }
  return {worst < 1e-8, fmt("worst scaled residual %.3g over 100 runs", worst)};
}

Outcome output_driven_speeds() {
  const auto s = cli::demo_3ood_scenario(cli::Demo3ood::output_driven);
  const auto t = simulate(s);
  const double o2 = last(t, *s.graph, "O2"), o3 = last(t, *s.graph, "O3");
  const bool ok = std::abs(o2 + 1.5) < 1e-6 && std::abs(o3 + 1.5) < 1e-6;
  return {ok, fmt("O2 = %.12g, O3 = %.12g", o2, o3)};
}

Outcome torque_driven_steady_state() {
  const auto s = cli::demo_3ood_scenario(cli::Demo3ood::torque_driven);
  const auto t = simulate(s);
  const auto& g = *s.graph;
  const std::size_t k = t.size() - 1;
  const double wi = last(t, g, "I");
  bool ok = std::abs(wi - 100.0) / 100.0 < 1e-4;
  double worst_tau = 0.0;
  for (auto j : {"J1", "J2", "J3"}) worst_tau = std::max(worst_tau, std::abs(port(t, k, j, "b") - 10.0) / 10.0);
  ok = ok && worst_tau < 1e-4;
  const Eigen::VectorXd& v = t.velocity[k];
  const double in = t.source_torque[k].dot(v);
  const double out = -t.load_torque[k].dot(v);
  const double balance = std::abs(in - out) / std::max(1.0, std::abs(in));
  ok = ok && std::abs(in - 300.0) / 300.0 < 1e-4 && balance < 1e-6;
  return {ok, fmt("omega_i = %.9g, power in - out rel %.3g", wi, balance)};
}

Outcome mobility_integers() {
  std::string detail;
  bool ok = true;
  for (auto name : builder_names()) {
    const auto g = build_named(name);
    const auto m = mobility(g);
    const auto e = oracle::exact_mobility(g);
    ok = ok && m.rank == e.rank && m.nullity == e.nullity && m.external_dof == e.external_dof;
    detail += std::string(name) + ":" + std::to_string(m.nullity) + "/" + std::to_string(m.external_dof) + " ";
  }
  const auto three = mobility(build_3ood());
  ok = ok && three.nullity == 4 && three.external_dof == 3 && mobility(build_two_output_diff()).nullity == 2 &&
       mobility(build_initial_design()).nullity == 1;
  return {ok, "nullity/external " + detail};
}

Outcome two_two_impulse() {
  const auto g = build_2_2d();
  const auto a = impulse_response(g, g.shaft_id("A"), 1.0, {g.shaft_id("root")});
  const auto at = [&](const char* n) { return a.at(g.shaft_id(n)); };
  const double expected[] = {2.0 / 3.0, -1.0 / 3.0, -1.0 / 6.0, -1.0 / 6.0};
  const char* names[] = {"A", "B", "C", "D"};
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(at(names[i]) - expected[i]));
  const bool ok = worst < 1e-9 && std::abs(at("B")) > std::abs(at("C"));
  return {ok, fmt("max deviation %.3g, |alpha_B| / |alpha_C| = %.6g", worst, std::abs(at("B") / at("C")))};
}

Outcome held_input_symmetry() {
  const auto g = build_3ood();
  const auto image = testsupport::rotation_ids(g);
  const std::set<ShaftId> held = {g.shaft_id("I")};
  const char* outputs[] = {"O1", "O2", "O3"};
  std::vector<std::map<ShaftId, double>> response;
  double split = 0.0;
  for (int n = 0; n < 3; ++n) {
    response.push_back(impulse_response(g, g.shaft_id(outputs[n]), 1.0, held));
    const auto& a = response.back();
    split = std::max(split, std::abs(a.at(g.shaft_id(outputs[(n + 1) % 3])) - a.at(g.shaft_id(outputs[(n + 2) % 3]))));
  }
  // Rotating the response to a torque on O(n) must give the response to O(n+1).
  double cyclic = 0.0;
  for (int n = 0; n < 3; ++n) {
    for (std::size_t i = 0; i < image.size(); ++i) {
      cyclic = std::max(cyclic, std::abs(response[n].at(ShaftId{i}) - response[(n + 1) % 3].at(image[i])));
    }
  }
  return {split < 1e-9 && cyclic < 1e-9, fmt("|alpha_O(n+1) - alpha_O(n+2)| = %.3g, cyclic deviation %.3g", split, cyclic)};
}

Outcome initial_design_samples() {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto g = build_initial_design();
  const auto z = nullspace_basis(g);
  double worst = 0.0;
  for (int sample = 0; sample < 1000; ++sample) {
    Eigen::VectorXd coeff(z.cols());
    for (Eigen::Index c = 0; c < z.cols(); ++c) coeff[c] = 100.0 * u(rng);
    const Eigen::VectorXd v = z * coeff;
    const double x1 = v[g.shaft_id("X1").value], x2 = v[g.shaft_id("X2").value], x3 = v[g.shaft_id("X3").value];
    worst = std::max({worst, std::abs(x1 - x2), std::abs(x2 - x3)});
  }
  return {worst < 1e-9, fmt("max pairwise output difference %.3g over 1000 samples", worst)};
}

Outcome penalty_agreement() {
  std::mt19937 rng(99);
  double worst = 0.0;
  for (int run = 0; run < 50; ++run) {
    const auto s = oracle::random_scenario(rng, 0.1);
    auto fast = s;
    fast.record_torques = false;
    const auto t = simulate(fast);
    const Eigen::VectorXd reference = oracle::penalty_final_velocity(s);
    const double scale = std::max(1.0, reference.cwiseAbs().maxCoeff());
    worst = std::max(worst, (t.velocity.back() - reference).cwiseAbs().maxCoeff() / scale);
  }
  return {worst < 1e-3, fmt("worst relative deviation %.3g over 50 graphs", worst)};
}

Outcome canonical_checks() {
  const auto s = cli::demo_3ood_scenario(cli::Demo3ood::equal_loads);
  const auto report = check_invariants(simulate(s), *s.graph, context_for(s));
  std::size_t passed = 0;
  std::string failed;
  for (const auto& c : report.checks) {
    if (c.pass) {
      ++passed;
    } else {
      failed += " " + c.check;
    }
  }
  return {report.passed() && !report.checks.empty(),
          std::to_string(passed) + "/" + std::to_string(report.checks.size()) + " checks pass" + failed};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 equal-load outputs reach 2 rad/s", equal_load_speeds},
      {"AC2 output speed sum over random asymmetric runs", random_output_sum},
      {"AC3 output-driven O2 = O3 = -1.5 rad/s", output_driven_speeds},
      {"AC4 torque-driven steady state and power balance", torque_driven_steady_state},
      {"AC5 mobility integers match exact rank", mobility_integers},
      {"AC6 2-2d impulse response", two_two_impulse},
      {"AC7 held-input symmetry and cyclic invariance", held_input_symmetry},
      {"AC8 initial design outputs always equal", initial_design_samples},
      {"AC9 penalty reference agrees with the saddle-point solver", penalty_agreement},
      {"AC10 canonical equal-load run passes every check", canonical_checks},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    if (!o.pass) ++failures;
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
