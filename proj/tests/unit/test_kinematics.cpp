#include <doctest.h>

#include <random>

#include "gearnet/builders.hpp"
#include "gearnet/kinematics.hpp"
#include "oracles/rational_rank.hpp"
#include "oracles/reference_dynamics.hpp"

using namespace gearnet;

namespace {

void check_against_oracle(const MechanismGraph& g) {
  const auto report = mobility(g);
  const auto exact = oracle::exact_mobility(g);
  CHECK(report.rank == exact.rank);
  CHECK(report.nullity == exact.nullity);
  CHECK(report.external_dof == exact.external_dof);
  CHECK(report.n_shafts == g.shaft_count());
  CHECK(report.n_rows == g.elements().size());
}

}  // namespace

TEST_CASE("differential and worm rows") {
  const auto two = build_two_output_diff();
  const auto c = constraint_matrix(two);
  REQUIRE(c.rows.rows() == 1);
  CHECK(c.rows(0, two.shaft_id("R").value) == 2.0);
  CHECK(c.rows(0, two.shaft_id("S1").value) == -1.0);
  CHECK(c.rows(0, two.shaft_id("S2").value) == -1.0);

  MechanismGraph g;
  const auto i = g.add_shaft("I", 1);
  const auto r = g.add_shaft("R", 1);
  g.add_element(WormPair{i, r, 20.0, true});
  g.finalize();
  const auto w = constraint_matrix(g);
  CHECK(w.rows(0, 0) == doctest::Approx(-1.0 / 20.0));
  CHECK(w.rows(0, 1) == 1.0);
  CHECK(w.row_provenance.at(0).value == 0);
}

TEST_CASE("a graph without elements has a 0 x n matrix and full mobility") {
  MechanismGraph g;
  g.add_shaft("a", 1);
  g.finalize();
  const auto c = constraint_matrix(g);
  CHECK(c.rows.rows() == 0);
  CHECK(c.rows.cols() == 1);
  const auto m = mobility(g);
  CHECK(m.rank == 0);
  CHECK(m.nullity == 1);
}

TEST_CASE("mobility of the built mechanisms") {
  const auto three = mobility(build_3ood());
  CHECK(three.n_shafts == 22);
  CHECK(three.n_rows == 18);
  CHECK(three.rank == 18);
  CHECK(three.nullity == 4);
  CHECK(three.external_dof == 3);

  const auto two = mobility(build_two_output_diff());
  CHECK(two.nullity == 2);
  CHECK(two.external_dof == 2);

  const auto initial = mobility(build_initial_design());
  CHECK(initial.nullity == 1);
  CHECK(initial.external_dof == 1);

  CHECK(mobility(build_2_2d()).nullity == 4);
  CHECK(mobility(build_multi_axle()).nullity == 3);
}

TEST_CASE("floating-point mobility agrees with exact rational rank") {
  for (auto name : builder_names()) {
    CAPTURE(name);
    check_against_oracle(build_named(name));
  }
  GearParams odd;
  odd.k = 37.0;
  odd.j = 0.3;
  check_against_oracle(build_3ood(odd));
  std::mt19937 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto scenario = oracle::random_scenario(rng);
    check_against_oracle(*scenario.graph);
  }
}

TEST_CASE("nullspace basis is orthonormal and annihilated by C") {
  for (auto name : builder_names()) {
    CAPTURE(name);
    const auto g = build_named(name);
    const auto z = nullspace_basis(g);
    const auto c = constraint_matrix(g).rows;
    CHECK(z.cols() == static_cast<Eigen::Index>(mobility(g).nullity));
    CHECK((c * z).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd gram = z.transpose() * z;
    CHECK((gram - Eigen::MatrixXd::Identity(z.cols(), z.cols())).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("3ood circulation mode moves only the internal side gears") {
  const auto g = build_3ood();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.shaft_count()));
  // S1 = +1 forces S2 = -1 through D1, S12 = -1 through C2, S11 = +1 through
  // D6, S5 = +1 through C5, and so on around the ring of differentials.
  const std::pair<const char*, double> mode[] = {{"S1", 1},  {"S2", -1}, {"S7", 1},  {"S12", -1},
                                                 {"S11", 1}, {"S5", 1},  {"S6", -1}, {"S10", -1},
                                                 {"S9", 1},  {"S4", 1},  {"S3", -1}, {"S8", -1}};
  for (const auto& [name, value] : mode) v[g.shaft_id(name).value] = value;
  const auto c = constraint_matrix(g).rows;
  CHECK((c * v).cwiseAbs().maxCoeff() == 0.0);
  for (auto name : {"I", "O1", "O2", "O3", "R1", "R4"}) CHECK(v[g.shaft_id(name).value] == 0.0);
}

TEST_CASE("solve_velocities on the 3ood") {
  const auto g = build_3ood();
  const auto at = [&](const char* n) { return g.shaft_id(n); };

  const auto sym = solve_velocities(g, {{at("I"), 20.0}, {at("O1"), 2.0}, {at("O2"), 2.0}});
  CHECK(sym[at("O3")] == doctest::Approx(2.0).epsilon(1e-12));

  const auto rev = solve_velocities(g, {{at("I"), 0.0}, {at("O1"), 1.0}, {at("O2"), 1.0}});
  CHECK(rev[at("O3")] == doctest::Approx(-2.0).epsilon(1e-12));

  const auto general = solve_velocities(g, {{at("I"), 40.0}, {at("O1"), 5.5}, {at("O2"), -1.0}});
  CHECK(general[at("O3")] == doctest::Approx(3 * 2 * 40.0 / 20.0 - 4.5).epsilon(1e-12));
  CHECK(general.residual < 1e-12);

  CHECK_THROWS_AS(solve_velocities(g, {{at("I"), 20.0}, {at("O1"), 2.0}, {at("O2"), 2.0}, {at("O3"), 3.0}}),
                  InfeasibleError);
  try {
    solve_velocities(g, {{at("I"), 20.0}, {at("O1"), 2.0}});
    FAIL("expected UnderdeterminedError");
  } catch (const UnderdeterminedError& e) {
    CHECK(std::find(e.shafts().begin(), e.shafts().end(), "O2") != e.shafts().end());
  }
  CHECK_THROWS_AS(solve_velocities(g, {{ShaftId{99}, 1.0}}), ValidationError);
}

TEST_CASE("solve_velocities on the two-output differential and the 2-2d") {
  const auto two = build_two_output_diff();
  const auto s = solve_velocities(two, {{two.shaft_id("R"), 5.0}, {two.shaft_id("S1"), 7.0}});
  CHECK(s[two.shaft_id("S2")] == doctest::Approx(3.0));

  const auto g = build_2_2d();
  const std::map<ShaftId, double> partial = {{g.shaft_id("root"), 5.0}, {g.shaft_id("A"), 5.0}, {g.shaft_id("C"), 5.0}};
  CHECK_THROWS_AS(solve_velocities(g, partial), UnderdeterminedError);
  const auto loose = solve_velocities(g, partial, SolveOptions{false});
  CHECK(loose[g.shaft_id("B")] == doctest::Approx(5.0));
  CHECK(loose[g.shaft_id("D")] == doctest::Approx(5.0));
  CHECK_FALSE(loose.undetermined_shafts.empty());
  CHECK(loose.undetermined.cols() == 1);
}

TEST_CASE("initial design forces all three outputs equal") {
  const auto g = build_initial_design();
  const auto s = solve_velocities(g, {{g.shaft_id("I"), 20.0}});
  for (auto name : {"X1", "X2", "X3"}) CHECK(s[g.shaft_id(name)] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(solve_velocities(g, {{g.shaft_id("I"), 20.0}, {g.shaft_id("X1"), 2.0}}), InfeasibleError);
}
