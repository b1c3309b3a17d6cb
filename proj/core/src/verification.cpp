#include "gearnet/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <json.hpp>

#include "gearnet/errors.hpp"
#include "gearnet/kinematics.hpp"

namespace gearnet {
namespace {

struct Residual {
  double value;
  double scale;
};

template <class... Terms>
Residual residual(double value, Terms... terms) {
  double scale = 0.0;
  ((scale = std::max(scale, std::abs(terms))), ...);
  return {value, scale};
}

// One recorded sample with name-free accessors.
struct Sample {
  const Trajectory& tr;
  std::size_t k;

  double w(Eigen::Index i) const { return tr.velocity[k](i); }
  double a(Eigen::Index i) const { return tr.acceleration[k](i); }
  double f(Eigen::Index c) const { return tr.port_torque[k](c); }
  double m(Eigen::Index i) const { return tr.inertia_used(i); }
  double load(Eigen::Index i) const { return tr.load_torque[k](i); }
  double src(Eigen::Index i) const { return tr.source_torque[k](i); }
};

using Evaluator = std::function<void(const Sample&, std::vector<Residual>&)>;

struct CheckDef {
  std::string name;
  std::string anchor;
  bool torque = false;
  double tolerance = 0.0;
  Evaluator eval;
};

class Resolver {
 public:
  Resolver(const Trajectory& tr, const MechanismGraph& graph) : tr_(tr), graph_(graph) {}

  Eigen::Index shaft(const std::string& name) const {
    const auto id = graph_.find_shaft(name);
    if (!id) throw ValidationError("verification: " + graph_.family() + " mechanism has no shaft '" + name + "'");
    return static_cast<Eigen::Index>(id->value);
  }
  Eigen::Index col(const std::string& element, std::string_view port) const {
    const auto c = tr_.port_column(element, port);
    if (!c) {
      throw ValidationError("verification: " + graph_.family() + " mechanism has no port " + element + "." +
                            std::string(port));
    }
    return static_cast<Eigen::Index>(*c);
  }

 private:
  const Trajectory& tr_;
  const MechanismGraph& graph_;
};

std::string n_(const char* prefix, int i) { return prefix + std::to_string(i); }

// Index tables for the three-output layout, resolved by name.
struct ThreeOod {
  Eigen::Index input;
  Eigen::Index ring[7];
  Eigen::Index side[13];
  Eigen::Index out[4];
  Eigen::Index worm_col[4], wheel_col[4];
  Eigen::Index diff_ring[7], diff_a[7], diff_b[7];
  Eigen::Index ratio_b[4];
  // Coupled side pairs (first stage, second stage) in coupling order.
  std::pair<int, int> pairs[6] = {{1, 7}, {2, 12}, {3, 8}, {4, 9}, {5, 11}, {6, 10}};

  explicit ThreeOod(const Resolver& r) {
    input = r.shaft("I");
    for (int i = 1; i <= 6; ++i) ring[i] = r.shaft(n_("R", i));
    for (int i = 1; i <= 12; ++i) side[i] = r.shaft(n_("S", i));
    for (int i = 1; i <= 3; ++i) {
      out[i] = r.shaft(n_("O", i));
      worm_col[i] = r.col(n_("W", i), "worm");
      wheel_col[i] = r.col(n_("W", i), "wheel");
      ratio_b[i] = r.col(n_("J", i), "b");
    }
    for (int i = 1; i <= 6; ++i) {
      diff_ring[i] = r.col(n_("D", i), "ring");
      diff_a[i] = r.col(n_("D", i), "side_a");
      diff_b[i] = r.col(n_("D", i), "side_b");
    }
  }

  double tau_i(const Sample& s) const {
    double sum = 0.0;
    for (int n = 1; n <= 3; ++n) sum -= s.f(worm_col[n]);
    return sum;
  }
  double tau_r(const Sample& s, int n) const { return n <= 3 ? s.f(wheel_col[n]) : s.f(diff_ring[n]); }
  double tau_s(const Sample& s, int i) const {
    const int d = (i + 1) / 2;
    const double f = s.f(i % 2 == 1 ? diff_a[d] : diff_b[d]);
    return i <= 6 ? f : -f;
  }
  double tau_o(const Sample& s, int n) const { return s.f(ratio_b[n]); }
  // Sum of I * alpha over the coupled side pairs.
  double side_inertial(const Sample& s) const {
    double sum = 0.0;
    for (const auto& [a, b] : pairs) sum += (s.m(side[a]) + s.m(side[b])) * s.a(side[b]);
    return sum;
  }
  // Ring inertia terms; the closed forms take rings as massless, so these
  // only carry the epsilon substitution unless rings are given inertia.
  double ring_inertial(const Sample& s, int n) const { return s.m(ring[n]) * s.a(ring[n]); }
  double rings_inertial(const Sample& s) const {
    double sum = 0.0;
    for (int n = 1; n <= 6; ++n) sum += ring_inertial(s, n);
    return sum;
  }
};

std::vector<CheckDef> three_ood_checks(const Resolver& resolver, const VerificationContext& ctx) {
  const auto t = std::make_shared<ThreeOod>(resolver);
  const double k = ctx.k;
  const double j = ctx.j;
  const double kin = ctx.kinematic_tolerance;
  const double tor = ctx.torque_tolerance;
  const bool equal = ctx.equal_loads;
  std::vector<CheckDef> defs;

  defs.push_back({"worm_ring_speed", "omega_R1 = omega_R2 = omega_R3 = omega_i / k", false, kin,
                  [t, k](const Sample& s, std::vector<Residual>& out) {
                    const double target = s.w(t->input) / k;
                    for (int n = 1; n <= 3; ++n) out.push_back(residual(s.w(t->ring[n]) - target, s.w(t->ring[n]), target));
                  }});
  if (equal) {
    defs.push_back({"ring_torque_share", "tau_R1 = tau_R2 = tau_R3 = k * tau_i / 3", true, tor,
                    [t, k](const Sample& s, std::vector<Residual>& out) {
                      const double target = k * t->tau_i(s) / 3.0;
                      for (int n = 1; n <= 3; ++n) out.push_back(residual(t->tau_r(s, n) - target, t->tau_r(s, n), target));
                    }});
  }
  defs.push_back({"side_torque_split",
                  equal ? "tau_a = tau_b = tau_ring / 2 per differential; tau_1 = ... = tau_6 = tau_R1 / 2 [+ ring I*alpha]"
                        : "tau_a = tau_b = tau_ring / 2 per differential",
                  true, tor, [t, equal](const Sample& s, std::vector<Residual>& out) {
                    for (int d = 1; d <= 6; ++d) {
                      const double fa = s.f(t->diff_a[d]);
                      const double fb = s.f(t->diff_b[d]);
                      const double half = -s.f(t->diff_ring[d]) / 2.0;
                      out.push_back(residual(fa - fb, fa, fb));
                      out.push_back(residual(fa - half, fa, half));
                    }
                    if (equal) {
                      const double half = (t->tau_r(s, 1) - t->ring_inertial(s, 1)) / 2.0;
                      for (int i = 1; i <= 6; ++i) out.push_back(residual(t->tau_s(s, i) - half, t->tau_s(s, i), half));
                    }
                  }});
  defs.push_back({"ring_speed_average", "omega_Rn = (omega_a + omega_b) / 2 for every differential", false, kin,
                  [t](const Sample& s, std::vector<Residual>& out) {
                    for (int d = 1; d <= 6; ++d) {
                      const double avg = 0.5 * (s.w(t->side[2 * d - 1]) + s.w(t->side[2 * d]));
                      out.push_back(residual(s.w(t->ring[d]) - avg, s.w(t->ring[d]), avg));
                    }
                  }});
  defs.push_back({"input_torque_from_sides",
                  equal ? "tau_i = (tau_1 + ... + tau_6) / k = 6 * tau_1 / k [+ ring I*alpha]" : "tau_i = (tau_1 + ... + tau_6) / k [+ ring I*alpha]", true,
                  tor, [t, k, equal](const Sample& s, std::vector<Residual>& out) {
                    const double ti = t->tau_i(s);
                    double sum = 0.0;
                    for (int i = 1; i <= 6; ++i) sum += t->tau_s(s, i);
                    for (int n = 1; n <= 3; ++n) sum += t->ring_inertial(s, n);
                    out.push_back(residual(ti - sum / k, ti, sum / k));
                    if (equal) {
                      const double six = (6.0 * t->tau_s(s, 1) + 3.0 * t->ring_inertial(s, 1)) / k;
                      out.push_back(residual(ti - six, ti, six));
                    }
                  }});
  defs.push_back({"shaft_inertia_balance", "I_i * alpha_i = tau_e - tau_i; I_1 * alpha_7 = tau_1 - tau_7 per side pair",
                  true, tor, [t](const Sample& s, std::vector<Residual>& out) {
                    const double ti = t->tau_i(s);
                    const double te = s.src(t->input) + s.load(t->input);
                    const double lhs = s.m(t->input) * s.a(t->input);
                    out.push_back(residual(lhs - (te - ti), lhs, te, ti));
                    for (const auto& [a, b] : t->pairs) {
                      const double inertial = (s.m(t->side[a]) + s.m(t->side[b])) * s.a(t->side[b]);
                      const double ta = t->tau_s(s, a) + s.load(t->side[a]);
                      const double tb = t->tau_s(s, b) - s.load(t->side[b]);
                      out.push_back(residual(inertial - (ta - tb), inertial, ta, tb));
                    }
                  }});
  defs.push_back({"side_coupling_rigid", "omega_1 = omega_7 and alpha_1 = alpha_7 for every coupled side pair", false,
                  kin, [t](const Sample& s, std::vector<Residual>& out) {
                    for (const auto& [a, b] : t->pairs) {
                      const auto ia = t->side[a];
                      const auto ib = t->side[b];
                      out.push_back(residual(s.w(ia) - s.w(ib), s.w(ia), s.w(ib)));
                      out.push_back(residual(s.a(ia) - s.a(ib), s.a(ia), s.a(ib)));
                    }
                  }});
  defs.push_back({"output_ratio_speed", "omega_On = j * omega_R(n+3)", false, kin,
                  [t, j](const Sample& s, std::vector<Residual>& out) {
                    for (int n = 1; n <= 3; ++n) {
                      const double target = j * s.w(t->ring[n + 3]);
                      out.push_back(residual(s.w(t->out[n]) - target, s.w(t->out[n]), target));
                    }
                  }});
  defs.push_back({"output_ratio_torque", "tau_On = tau_R(n+3) / j [+ ring I*alpha]", true, tor,
                  [t, j](const Sample& s, std::vector<Residual>& out) {
                    for (int n = 1; n <= 3; ++n) {
                      const double target = (t->tau_r(s, n + 3) - t->ring_inertial(s, n + 3)) / j;
                      out.push_back(residual(t->tau_o(s, n) - target, t->tau_o(s, n), target));
                    }
                  }});
  defs.push_back({"output_ring_torque_sum", "tau_R4 = tau_7 + tau_8, tau_R5 = tau_9 + tau_10, tau_R6 = tau_11 + tau_12",
                  true, tor, [t](const Sample& s, std::vector<Residual>& out) {
                    for (int n = 4; n <= 6; ++n) {
                      const double a = t->tau_s(s, 2 * n - 1);
                      const double b = t->tau_s(s, 2 * n);
                      out.push_back(residual(t->tau_r(s, n) - (a + b), t->tau_r(s, n), a, b));
                    }
                  }});
  if (equal) {
    defs.push_back({"side_speed_equal_loads", "omega_1 = ... = omega_12 = omega_i / k", false, kin,
                    [t, k](const Sample& s, std::vector<Residual>& out) {
                      const double target = s.w(t->input) / k;
                      for (int i = 1; i <= 12; ++i) out.push_back(residual(s.w(t->side[i]) - target, s.w(t->side[i]), target));
                    }});
    defs.push_back({"output_speed_equal_loads", "omega_O1 = omega_O2 = omega_O3 = j * omega_i / k", false, kin,
                    [t, k, j](const Sample& s, std::vector<Residual>& out) {
                      const double target = j * s.w(t->input) / k;
                      for (int n = 1; n <= 3; ++n) out.push_back(residual(s.w(t->out[n]) - target, s.w(t->out[n]), target));
                    }});
    defs.push_back({"output_torque_equal_loads", "tau_O1 = tau_O2 = tau_O3 = k * tau_i / (3 j) - 2 * I_1 * alpha_1 / j [+ ring I*alpha]",
                    true, tor, [t, k, j](const Sample& s, std::vector<Residual>& out) {
                      const double inertia = s.m(t->side[1]) + s.m(t->side[7]);
                      const double drive = k * t->tau_i(s) / (3.0 * j);
                      const double inertial = 2.0 * inertia * s.a(t->side[1]) / j;
                      for (int n = 1; n <= 3; ++n) {
                        // First-stage rings feeding output n: (R1, R2), (R2, R3), (R3, R1).
                        const double first = 0.5 * (t->ring_inertial(s, n) + t->ring_inertial(s, n % 3 + 1));
                        const double rings = (first + t->ring_inertial(s, n + 3)) / j;
                        const double to = t->tau_o(s, n);
                        out.push_back(residual(to - (drive - inertial - rings), to, drive, inertial));
                      }
                    }});
  }
  defs.push_back({"output_speed_sum", "omega_O1 + omega_O2 + omega_O3 = 3 j * omega_i / k", false, kin,
                  [t, k, j](const Sample& s, std::vector<Residual>& out) {
                    const double target = 3.0 * j * s.w(t->input) / k;
                    double sum = 0.0;
                    double largest = std::abs(target);
                    for (int n = 1; n <= 3; ++n) {
                      sum += s.w(t->out[n]);
                      largest = std::max(largest, std::abs(s.w(t->out[n])));
                    }
                    out.push_back({sum - target, largest});
                  }});
  defs.push_back({"output_torque_sum", "tau_O1 + tau_O2 + tau_O3 = (k * tau_i - sum_n I_n * alpha_n) / j [+ ring I*alpha]", true, tor,
                  [t, k, j](const Sample& s, std::vector<Residual>& out) {
                    const double drive = k * t->tau_i(s) / j;
                    const double inertial = (t->side_inertial(s) + t->rings_inertial(s)) / j;
                    double sum = 0.0;
                    for (int n = 1; n <= 3; ++n) sum += t->tau_o(s, n);
                    out.push_back(residual(sum - (drive - inertial), sum, drive, inertial));
                  }});
  if (ctx.input_locked) {
    defs.push_back({"output_driven_speed", "omega_i = 0 and omega_O1 = -(omega_O2 + omega_O3)", false, kin,
                    [t](const Sample& s, std::vector<Residual>& out) {
                      const double o1 = s.w(t->out[1]);
                      const double rest = s.w(t->out[2]) + s.w(t->out[3]);
                      out.push_back(residual(s.w(t->input), s.w(t->input)));
                      out.push_back(residual(o1 + rest, o1, rest));
                    }});
    // Taken literally, with tau_i = 0 at the locked input.
    defs.push_back({"output_driven_torque", "tau_O1 = -tau_O2 - tau_O3 - sum_n I_n * alpha_n / j [+ ring I*alpha]", true, tor,
                    [t, j](const Sample& s, std::vector<Residual>& out) {
                      const double o1 = s.f(t->ratio_b[1]);
                      const double rest = t->tau_o(s, 2) + t->tau_o(s, 3);
                      const double inertial = (t->side_inertial(s) + t->rings_inertial(s)) / j;
                      out.push_back(residual(o1 + rest + inertial, o1, rest, inertial));
                    }});
  }
  return defs;
}

std::vector<CheckDef> two_od_checks(const Resolver& resolver, const VerificationContext& ctx) {
  const Eigen::Index r = resolver.shaft("R");
  const Eigen::Index a = resolver.shaft("S1");
  const Eigen::Index b = resolver.shaft("S2");
  const Eigen::Index fr = resolver.col("D1", "ring");
  const Eigen::Index fa = resolver.col("D1", "side_a");
  const Eigen::Index fb = resolver.col("D1", "side_b");
  std::vector<CheckDef> defs;
  defs.push_back({"ring_speed_average", "omega_R = (omega_1 + omega_2) / 2", false, ctx.kinematic_tolerance,
                  [=](const Sample& s, std::vector<Residual>& out) {
                    const double avg = 0.5 * (s.w(a) + s.w(b));
                    out.push_back(residual(s.w(r) - avg, s.w(r), avg));
                  }});
  defs.push_back({"side_torque_split", "tau_1 = tau_2 = tau_R / 2", true, ctx.torque_tolerance,
                  [=](const Sample& s, std::vector<Residual>& out) {
                    const double half = -s.f(fr) / 2.0;
                    out.push_back(residual(s.f(fa) - s.f(fb), s.f(fa), s.f(fb)));
                    out.push_back(residual(s.f(fa) - half, s.f(fa), half));
                  }});
  return defs;
}

std::vector<CheckDef> generic_checks(const Trajectory& tr, const MechanismGraph& graph) {
  std::vector<CheckDef> defs;
  const auto c = std::make_shared<Eigen::MatrixXd>(constraint_matrix(graph).rows);
  const bool drift_rhs = tr.integrator == Integrator::semi_implicit_euler;
  const double dt = tr.timestep;

  // Element rows for each port column.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> column_owner;
  for (std::size_t i = 0; i < tr.ports.size(); ++i) {
    column_owner.emplace_back(static_cast<Eigen::Index>(tr.ports[i].element.value),
                              static_cast<Eigen::Index>(tr.ports[i].shaft.value));
  }
  const auto owners = std::make_shared<decltype(column_owner)>(std::move(column_owner));

  defs.push_back({"kkt_residual", "M alpha - C^T lambda - tau_ext = 0 and C alpha = rhs", true, kKktTolerance,
                  [c, owners, drift_rhs, dt](const Sample& s, std::vector<Residual>& out) {
                    const auto n = s.tr.velocity[s.k].size();
                    Eigen::VectorXd element_torque = Eigen::VectorXd::Zero(n);
                    for (std::size_t i = 0; i < owners->size(); ++i) {
                      element_torque((*owners)[i].second) += s.f(static_cast<Eigen::Index>(i));
                    }
                    for (Eigen::Index i = 0; i < n; ++i) {
                      const double inertial = s.m(i) * s.a(i);
                      const double r = inertial - element_torque(i) - s.load(i) - s.src(i);
                      out.push_back(residual(r, inertial, element_torque(i), s.load(i), s.src(i)));
                    }
                    if (c->rows() > 0) {
                      const Eigen::VectorXd& a = s.tr.acceleration[s.k];
                      Eigen::VectorXd r = *c * a;
                      if (drift_rhs) r += (*c * s.tr.velocity[s.k]) / dt;
                      const double scale = c->cwiseAbs().maxCoeff() * a.cwiseAbs().maxCoeff();
                      out.push_back({r.cwiseAbs().maxCoeff(), scale});
                    }
                  }});
  defs.push_back({"element_power", "sum_p tau_p * omega_p = 0 for every element", true, kElementPowerTolerance,
                  [owners](const Sample& s, std::vector<Residual>& out) {
                    std::size_t i = 0;
                    while (i < owners->size()) {
                      const Eigen::Index element = (*owners)[i].first;
                      double power = 0.0;
                      double scale = 0.0;
                      for (; i < owners->size() && (*owners)[i].first == element; ++i) {
                        const double p = s.f(static_cast<Eigen::Index>(i)) * s.w((*owners)[i].second);
                        power += p;
                        scale = std::max(scale, std::abs(p));
                      }
                      out.push_back({power, scale});
                    }
                  }});
  return defs;
}

CheckResult evaluate(const CheckDef& def, const Trajectory& tr) {
  CheckResult result;
  result.check = def.name;
  result.anchor_quote = def.anchor;
  result.needs_torques = def.torque;
  result.tolerance = def.tolerance;
  result.samples = tr.size();
  std::vector<Residual> buffer;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    buffer.clear();
    def.eval(Sample{tr, k}, buffer);
    for (const auto& r : buffer) {
      const double abs = std::abs(r.value);
      const double rel = abs / std::max(1.0, r.scale);
      result.max_abs_residual = std::max(result.max_abs_residual, abs);
      if (rel > result.max_rel_residual || std::isnan(rel)) {
        result.max_rel_residual = std::isnan(rel) ? INFINITY : rel;
        result.worst_step = k;
        result.worst_time = tr.time[k];
      }
    }
  }
  result.pass = result.max_rel_residual < def.tolerance;
  return result;
}

CheckResult evaluate_power(const Trajectory& tr, const MechanismGraph& graph, double tolerance) {
  const PowerBalance balance = power_balance(tr, graph);
  CheckResult result;
  result.check = "power_balance";
  result.anchor_quote = "P_source + P_load - d/dt (1/2 omega^T I omega) = 0";
  result.needs_torques = true;
  result.tolerance = tolerance;
  result.samples = tr.size();
  double bound = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double abs = std::abs(balance.residual[k]);
    const double rel = abs / std::max(1.0, balance.scale[k]);
    bound = std::max(bound, balance.epsilon_bound[k]);
    result.max_abs_residual = std::max(result.max_abs_residual, abs);
    if (rel > result.max_rel_residual) {
      result.max_rel_residual = rel;
      result.worst_step = k;
      result.worst_time = tr.time[k];
    }
    if (!(abs <= tolerance * std::max(1.0, balance.scale[k]) + balance.epsilon_bound[k])) result.pass = false;
  }
  result.epsilon_bound = bound;
  return result;
}

bool same_load(const Load& a, const Load& b) {
  if (a.index() != b.index()) return false;
  if (const auto* v = std::get_if<Viscous>(&a)) return v->b == std::get<Viscous>(b).b;
  if (const auto* r = std::get_if<ConstantResistive>(&a)) return r->tau_r == std::get<ConstantResistive>(b).tau_r;
  if (const auto* t = std::get_if<AppliedTorque>(&a)) {
    const auto& u = std::get<AppliedTorque>(b);
    if (t->tau.is_constant() && u.tau.is_constant()) return t->tau.constant_value() == u.tau.constant_value();
    if (t->tau.is_table() && u.tau.is_table()) return t->tau.samples() == u.tau.samples();
    return false;
  }
  return true;
}

double ratio_of(const MechanismGraph& graph, const char* element, double fallback) {
  const auto id = graph.find_element(element);
  if (!id) return fallback;
  const auto& kind = graph.element(*id).kind;
  if (const auto* w = std::get_if<WormPair>(&kind)) return w->ratio_k;
  if (const auto* r = std::get_if<FixedRatio>(&kind)) return r->ratio;
  return fallback;
}

}  // namespace

VerificationContext context_for(const MechanismGraph& graph) {
  VerificationContext ctx;
  ctx.family = graph.family();
  ctx.k = ratio_of(graph, "W1", ctx.k);
  ctx.j = ratio_of(graph, "J1", ctx.j);
  return ctx;
}

VerificationContext context_for(const Scenario& scenario) {
  if (!scenario.graph) throw PreconditionError("verification: scenario has no graph");
  const MechanismGraph& graph = *scenario.graph;
  VerificationContext ctx = context_for(graph);
  ctx.drive = std::string(drive_name(scenario.drive));
  ctx.input_locked = std::holds_alternative<InputLocked>(scenario.drive);
  if (ctx.family != "3ood" || ctx.input_locked) return ctx;

  const auto input = graph.find_shaft("I");
  if (!input || drive_shaft(scenario.drive) != *input) return ctx;
  if (!scenario.sources.empty() || !scenario.initial_velocity.empty()) return ctx;

  std::vector<ShaftId> outputs;
  for (int n = 1; n <= 3; ++n) {
    const auto id = graph.find_shaft(n_("O", n));
    if (!id) return ctx;
    outputs.push_back(*id);
  }
  const auto load_at = [&](ShaftId id) -> Load {
    const auto it = scenario.loads.find(id);
    return it == scenario.loads.end() ? Load{Free{}} : it->second;
  };
  for (const auto& [id, load] : scenario.loads) {
    const bool output = std::find(outputs.begin(), outputs.end(), id) != outputs.end();
    if (!output && !std::holds_alternative<Free>(load)) return ctx;
  }
  const Load first = load_at(outputs[0]);
  if (std::holds_alternative<Locked>(first)) return ctx;
  for (const auto id : outputs) {
    if (!same_load(first, load_at(id))) return ctx;
  }
  double side = -1.0;
  for (int i = 7; i <= 12; ++i) {
    const auto id = graph.find_shaft(n_("S", i));
    if (!id) return ctx;
    const double inertia = graph.shaft(*id).inertia;
    if (side >= 0.0 && inertia != side) return ctx;
    side = inertia;
  }
  ctx.equal_loads = true;
  return ctx;
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* VerificationReport::find(std::string_view check) const {
  for (const auto& c : checks) {
    if (c.check == check) return &c;
  }
  return nullptr;
}

namespace {

// Power balance is evaluated separately and only holds a slot here.
std::vector<CheckDef> all_defs(const Trajectory& tr, const MechanismGraph& graph, const VerificationContext& ctx) {
  const Resolver resolver(tr, graph);
  std::vector<CheckDef> defs;
  if (ctx.family == "3ood") defs = three_ood_checks(resolver, ctx);
  if (ctx.family == "2od") defs = two_od_checks(resolver, ctx);
  for (auto& d : generic_checks(tr, graph)) defs.push_back(std::move(d));
  defs.push_back({"power_balance", "", true, ctx.torque_tolerance, {}});
  return defs;
}

Trajectory skeleton(const MechanismGraph& graph) {
  Trajectory tr;
  tr.ports = port_columns(graph);
  for (const auto& s : graph.shafts()) tr.shaft_names.push_back(s.name);
  return tr;
}

}  // namespace

std::vector<std::string> registered_checks(const MechanismGraph& graph, const VerificationContext& context,
                                           bool with_torques) {
  std::vector<std::string> names;
  const Trajectory tr = skeleton(graph);
  for (const auto& d : all_defs(tr, graph, context)) {
    if (with_torques || !d.torque) names.push_back(d.name);
  }
  return names;
}

VerificationReport check_invariants(const Trajectory& trajectory, const MechanismGraph& graph,
                                    const VerificationContext& context,
                                    const std::optional<std::vector<std::string>>& selection) {
  VerificationReport report;
  if (trajectory.empty()) return report;
  if (trajectory.velocity.front().size() != static_cast<Eigen::Index>(graph.shaft_count())) {
    throw PreconditionError("verification: trajectory does not match the graph");
  }

  const auto defs = all_defs(trajectory, graph, context);
  std::vector<const CheckDef*> chosen;
  if (selection) {
    for (const auto& name : *selection) {
      const auto it = std::find_if(defs.begin(), defs.end(), [&](const CheckDef& d) { return d.name == name; });
      if (it == defs.end()) throw ValidationError("verification: check '" + name + "' is not registered here");
      if (it->torque && !trajectory.has_torques) {
        throw MissingTorqueError("verification: check '" + name + "' needs torques but none were recorded");
      }
      chosen.push_back(&*it);
    }
  } else {
    for (const auto& d : defs) {
      if (!d.torque || trajectory.has_torques) chosen.push_back(&d);
    }
  }

  for (const CheckDef* d : chosen) {
    if (d->name == "power_balance") {
      report.checks.push_back(evaluate_power(trajectory, graph, d->tolerance));
    } else {
      report.checks.push_back(evaluate(*d, trajectory));
    }
  }
  return report;
}

PowerBalance power_balance(const Trajectory& trajectory, const MechanismGraph& graph) {
  if (!trajectory.empty() && !trajectory.has_torques) {
    throw MissingTorqueError("power balance needs torques but none were recorded");
  }
  PowerBalance out;
  const auto n = static_cast<Eigen::Index>(graph.shaft_count());
  Eigen::VectorXd physical(n);
  for (const auto& s : graph.shafts()) physical(static_cast<Eigen::Index>(s.id.value)) = s.inertia;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const Eigen::VectorXd& v = trajectory.velocity[k];
    const Eigen::VectorXd& a = trajectory.acceleration[k];
    const double source = trajectory.source_torque[k].dot(v);
    const double load = trajectory.load_torque[k].dot(v);
    double kinetic = 0.0;
    double bound = 0.0;
    double scale = std::max(std::abs(source), std::abs(load));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = physical(i) * v(i) * a(i);
      kinetic += p;
      scale = std::max(scale, std::abs(p));
      if (trajectory.epsilon_substituted[static_cast<std::size_t>(i)]) {
        bound += std::abs(trajectory.inertia_used(i) * v(i) * a(i));
      }
    }
    out.residual.push_back(source + load - kinetic);
    out.epsilon_bound.push_back(bound);
    out.source_power.push_back(source);
    out.load_power.push_back(load);
    out.scale.push_back(scale);
  }
  return out;
}

std::string report_json(const VerificationReport& report) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    nlohmann::ordered_json entry;
    entry["check"] = c.check;
    entry["anchor_quote"] = c.anchor_quote;
    entry["max_rel_residual"] = c.max_rel_residual;
    entry["pass"] = c.pass;
    entry["max_abs_residual"] = c.max_abs_residual;
    entry["tolerance"] = c.tolerance;
    entry["worst_step"] = c.worst_step;
    entry["worst_time"] = c.worst_time;
    entry["samples"] = c.samples;
    if (c.epsilon_bound) entry["epsilon_bound"] = *c.epsilon_bound;
    doc.push_back(entry);
  }
  return doc.dump(2) + "\n";
}

}  // namespace gearnet
