#include "gearnet/cli/app.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gearnet/builders.hpp"
#include "gearnet/cli/demos.hpp"
#include "gearnet/cli/scenario_file.hpp"
#include "gearnet/kinematics.hpp"
#include "gearnet/trajectory_csv.hpp"
#include "gearnet/verification.hpp"

namespace gearnet::cli {
namespace {

namespace fs = std::filesystem;

std::string num(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.10g", value);
  return buffer;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot write '" + path.string() + "'");
  file << content;
  if (!file) throw ValidationError("failed writing '" + path.string() + "'");
}

void print_summary(const VerificationReport& report, std::ostream& out) {
  std::size_t failed = 0;
  for (const auto& c : report.checks) failed += c.pass ? 0 : 1;
  out << "verification: " << report.checks.size() << " checks, "
      << (failed == 0 ? std::string("all passed") : std::to_string(failed) + " failed") << '\n';
  for (const auto& c : report.checks) {
    out << "  " << (c.pass ? "PASS " : "FAIL ") << c.check << " max_rel=" << num(c.max_rel_residual)
        << " tol=" << num(c.tolerance);
    if (!c.pass) out << " worst_step=" << c.worst_step << " t=" << num(c.worst_time);
    out << '\n';
  }
}

int exit_for(const VerificationReport& report) { return report.passed() ? kExitOk : kExitVerification; }

// --- dof / nullspace -------------------------------------------------------

int cmd_dof(const std::string& mechanism, bool as_json, std::ostream& out) {
  const auto graph = resolve_mechanism(mechanism);
  const MobilityReport m = mobility(*graph);
  if (as_json) {
    nlohmann::ordered_json doc{{"mechanism", mechanism}, {"n_shafts", m.n_shafts}, {"n_rows", m.n_rows},
                               {"rank", m.rank},         {"nullity", m.nullity},   {"external_dof", m.external_dof}};
    out << doc.dump(2) << '\n';
  } else {
    out << "mechanism=" << mechanism << '\n'
        << "n_shafts=" << m.n_shafts << '\n'
        << "n_rows=" << m.n_rows << '\n'
        << "rank=" << m.rank << '\n'
        << "nullity=" << m.nullity << '\n'
        << "external_dof=" << m.external_dof << '\n';
  }
  return kExitOk;
}

int cmd_nullspace(const std::string& mechanism, std::ostream& out) {
  const auto graph = resolve_mechanism(mechanism);
  const Eigen::MatrixXd basis = nullspace_basis(*graph);
  nlohmann::ordered_json doc;
  doc["mechanism"] = mechanism;
  doc["shafts"] = nlohmann::ordered_json::array();
  for (const auto& s : graph->shafts()) doc["shafts"].push_back(s.name);
  doc["basis"] = nlohmann::ordered_json::array();
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    nlohmann::ordered_json v = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < basis.rows(); ++r) v.push_back(std::abs(basis(r, c)) < 1e-15 ? 0.0 : basis(r, c));
    doc["basis"].push_back(v);
  }
  out << doc.dump(2) << '\n';
  return kExitOk;
}

// --- simulate / verify -----------------------------------------------------

struct RunResult {
  int code = kExitOk;
  std::string message;
};

// Runs one scenario file and writes its artifacts; used by batch mode.
RunResult run_batch_item(const fs::path& file, bool verify) {
  RunResult result;
  try {
    const ScenarioFile sf = load_scenario(file);
    const Trajectory traj = simulate(sf.scenario);
    const fs::path csv = sf.trajectory_path.value_or(file.parent_path() / (file.stem().string() + ".csv"));
    write_file(csv, trajectory_csv(traj));
    result.message = "ok, " + std::to_string(traj.size()) + " samples -> " + csv.string();
    if (verify) {
      const auto report = check_invariants(traj, *sf.scenario.graph, context_for(sf.scenario));
      const fs::path rp = sf.report_path.value_or(file.parent_path() / (file.stem().string() + ".report.json"));
      write_file(rp, report_json(report));
      result.code = exit_for(report);
      result.message += report.passed() ? ", verification passed" : ", verification FAILED";
    }
  } catch (const ValidationError& e) {
    result = {kExitValidation, std::string("error: ") + e.what()};
  } catch (const MissingTorqueError& e) {
    result = {kExitValidation, std::string("error: ") + e.what()};
  } catch (const SolverError& e) {
    result = {kExitSolver, std::string("solver error: ") + e.what()};
  }
  return result;
}

std::size_t batch_threads(std::size_t jobs) {
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GEARNET_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || value < 1) throw ValidationError("GEARNET_THREADS must be a positive integer");
    threads = static_cast<std::size_t>(value);
  }
  return std::max<std::size_t>(1, std::min(threads, jobs));
}

int cmd_batch(const fs::path& dir, bool verify, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(dir)) throw ValidationError("batch directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json" &&
        entry.path().filename().string().find(".report.json") == std::string::npos) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RunResult> results(files.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) results[i] = run_batch_item(files[i], verify);
  };
  std::vector<std::thread> pool;
  const std::size_t threads = batch_threads(files.size());
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kExitOk;
  for (std::size_t i = 0; i < files.size(); ++i) {
    (results[i].code == kExitOk ? out : err) << files[i].filename().string() << ": " << results[i].message << '\n';
    code = std::max(code, results[i].code);
  }
  out << files.size() << " scenarios, " << threads << " threads\n";
  return code;
}

int cmd_simulate(const std::string& scenario_path, const std::string& output, bool verify, const std::string& report,
                 std::ostream& out, std::ostream& err) {
  const ScenarioFile sf = load_scenario(scenario_path);
  const Trajectory traj = simulate(sf.scenario);
  std::optional<fs::path> csv = sf.trajectory_path;
  if (!output.empty()) csv = output;
  if (csv) {
    write_file(*csv, trajectory_csv(traj));
  } else {
    write_trajectory_csv(out, traj);
  }
  if (!verify) return kExitOk;

  const auto result = check_invariants(traj, *sf.scenario.graph, context_for(sf.scenario));
  std::optional<fs::path> rp = sf.report_path;
  if (!report.empty()) rp = report;
  if (rp) write_file(*rp, report_json(result));
  print_summary(result, csv ? out : err);
  return exit_for(result);
}

int cmd_verify(const std::string& scenario_path, const std::string& report, const std::vector<std::string>& checks,
               std::ostream& out) {
  const ScenarioFile sf = load_scenario(scenario_path);
  const Trajectory traj = simulate(sf.scenario);
  std::optional<std::vector<std::string>> selection;
  if (!checks.empty()) selection = checks;
  const auto result = check_invariants(traj, *sf.scenario.graph, context_for(sf.scenario), selection);
  std::optional<fs::path> rp = sf.report_path;
  if (!report.empty()) rp = report;
  if (rp) {
    write_file(*rp, report_json(result));
    print_summary(result, out);
  } else {
    out << report_json(result);
  }
  return exit_for(result);
}

// --- demos -----------------------------------------------------------------

double last(const Trajectory& t, const MechanismGraph& g, const char* shaft) {
  return t.velocity.back()(static_cast<Eigen::Index>(g.shaft_id(shaft).value));
}

void print_mobility(const MechanismGraph& g, std::ostream& out) {
  const auto m = mobility(g);
  out << "  mobility: shafts=" << m.n_shafts << " rows=" << m.n_rows << " rank=" << m.rank << " nullity=" << m.nullity
      << " external_dof=" << m.external_dof << '\n';
}

int demo_3ood(Demo3ood mode, const std::string& csv, const std::string& report_path, std::ostream& out) {
  const Scenario s = demo_3ood_scenario(mode);
  const MechanismGraph& g = *s.graph;
  const char* title = mode == Demo3ood::equal_loads     ? "equal loads: input velocity-driven at 20 rad/s, viscous b=1 on O1, O2, O3"
                      : mode == Demo3ood::output_driven ? "output driven: input locked, O1 velocity-driven at 3 rad/s, viscous b=1 on O2, O3"
                                                        : "torque driven: 3 N m on the input, viscous b=1 on O1, O2, O3";
  out << "demo 3ood (" << title << ")\n";
  print_mobility(g, out);
  const Trajectory t = simulate(s);
  if (!csv.empty()) write_file(csv, trajectory_csv(t));

  const auto& k = t.size() - 1;
  const Eigen::VectorXd& tau = t.port_torque[k];
  const auto col = [&](const char* e, const char* p) { return tau(static_cast<Eigen::Index>(*t.port_column(e, p))); };
  double tau_i = 0.0;
  for (const char* w : {"W1", "W2", "W3"}) tau_i -= col(w, "worm");
  out << "  after " << num(t.time.back()) << " s:\n";
  out << "    I.omega  = " << num(last(t, g, "I")) << " rad/s\n";
  for (int n = 1; n <= 3; ++n) {
    const std::string o = "O" + std::to_string(n);
    out << "    " << o << ".omega = " << num(last(t, g, o.c_str())) << " rad/s   " << o
        << ".tau = " << num(col(("J" + std::to_string(n)).c_str(), "b")) << " N m\n";
  }
  out << "    tau_i    = " << num(tau_i) << " N m"
      << (mode == Demo3ood::output_driven ? " (reaction held by the locked worm stage)" : "") << '\n';
  const Eigen::VectorXd& v = t.velocity[k];
  out << "    power in = " << num(t.source_torque[k].dot(v)) << " W, dissipated = " << num(-t.load_torque[k].dot(v))
      << " W\n";

  const auto report = check_invariants(t, g, context_for(s));
  if (!report_path.empty()) write_file(report_path, report_json(report));
  print_summary(report, out);
  return exit_for(report);
}

int demo_2od(std::ostream& out) {
  auto g = std::make_shared<MechanismGraph>(build_two_output_diff());
  out << "demo 2od (ring velocity-driven at 10 rad/s, free sides with unit inertia)\n";
  print_mobility(*g, out);
  Scenario s;
  s.graph = g;
  s.drive = VelocityDriven{g->shaft_id("R"), 10.0};
  s.duration = 0.1;
  const Trajectory t = simulate(s);
  out << "  S1.omega = " << num(last(t, *g, "S1")) << " rad/s, S2.omega = " << num(last(t, *g, "S2")) << " rad/s\n";
  const auto report = check_invariants(t, *g, context_for(s));
  print_summary(report, out);
  return exit_for(report);
}

int demo_initial(std::ostream& out) {
  auto g = std::make_shared<MechanismGraph>(build_initial_design());
  out << "demo initial (input velocity-driven at 20 rad/s, viscous b=1 on X1, X2, X3)\n";
  print_mobility(*g, out);
  const Eigen::MatrixXd basis = nullspace_basis(*g);
  const Eigen::Index x[3] = {static_cast<Eigen::Index>(g->shaft_id("X1").value),
                             static_cast<Eigen::Index>(g->shaft_id("X2").value),
                             static_cast<Eigen::Index>(g->shaft_id("X3").value)};
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      const double gap = (basis.row(x[a]) - basis.row(x[b])).cwiseAbs().maxCoeff();
      out << "  X" << a + 1 << " - X" << b + 1 << " over the feasible velocity space: "
          << (gap < 1e-12 ? "always equal" : "independent") << '\n';
    }
  }
  Scenario s;
  s.graph = g;
  s.drive = VelocityDriven{g->shaft_id("I"), 20.0};
  for (const char* o : {"X1", "X2", "X3"}) s.loads[g->shaft_id(o)] = Viscous{1.0};
  s.duration = 0.5;
  const Trajectory t = simulate(s);
  for (const char* o : {"X1", "X2", "X3"}) out << "  " << o << ".omega = " << num(last(t, *g, o)) << " rad/s\n";
  return kExitOk;
}

void print_impulse(const MechanismGraph& g, const std::map<ShaftId, double>& alpha, std::ostream& out) {
  out << "   ";
  for (const auto& [id, a] : alpha) out << ' ' << g.shaft(id).name << '=' << num(a);
  out << '\n';
}

int demo_2_2d(std::ostream& out) {
  out << "demo 2-2d (unit torque on A, root held)\n";
  const MechanismGraph unit = build_2_2d();
  print_mobility(unit, out);
  out << "  unit inertia on every shaft, accelerations in rad/s^2:\n";
  print_impulse(unit, impulse_response(unit, unit.shaft_id("A"), 1.0, {unit.shaft_id("root")}), out);
  TwoTwoParams massless;
  massless.intermediate_inertia = 0.0;
  const MechanismGraph ideal = build_2_2d(massless);
  out << "  massless intermediate shafts L and R:\n";
  print_impulse(ideal, impulse_response(ideal, ideal.shaft_id("A"), 1.0, {ideal.shaft_id("root")}), out);
  return kExitOk;
}

int demo_multi_axle(std::ostream& out) {
  const MechanismGraph g = build_multi_axle();
  out << "demo multi-axle (three planetary stages in series, rho=2, unit inertias, input held)\n";
  print_mobility(g, out);
  for (const char* target : {"X", "Y", "Z"}) {
    out << "  unit torque on " << target << ":\n";
    print_impulse(g, impulse_response(g, g.shaft_id(target), 1.0, {g.shaft_id("I")}), out);
  }
  return kExitOk;
}

int cmd_demo(const std::string& name, bool equal, bool output_driven, bool torque_driven, const std::string& csv,
             const std::string& report, std::ostream& out) {
  const int modes = int(equal) + int(output_driven) + int(torque_driven);
  if (modes > 1) throw ValidationError("demo: choose at most one of --equal-loads, --output-driven, --torque-driven");
  if (modes == 1 && name != "3ood") throw ValidationError("demo: drive-mode flags apply only to 3ood");
  if (name == "3ood") {
    const Demo3ood mode = output_driven ? Demo3ood::output_driven
                          : torque_driven ? Demo3ood::torque_driven
                                          : Demo3ood::equal_loads;
    return demo_3ood(mode, csv, report, out);
  }
  if (!csv.empty() || !report.empty()) throw ValidationError("demo: --csv and --report apply only to 3ood");
  if (name == "2od") return demo_2od(out);
  if (name == "initial") return demo_initial(out);
  if (name == "2-2d") return demo_2_2d(out);
  if (name == "multi-axle") return demo_multi_axle(out);
  throw ValidationError("unknown demo '" + name + "' (expected 2od, 3ood, initial, 2-2d or multi-axle)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"gearnet: constrained gear-train simulation", "gearnet"};
  app.require_subcommand(1);

  std::string mechanism;
  bool as_json = false;
  auto* dof = app.add_subcommand("dof", "Print the mobility report of a mechanism");
  dof->add_option("-m,--mechanism", mechanism, "Builder name or mechanism description file")->required();
  dof->add_flag("--json", as_json, "Print JSON instead of key=value lines");

  auto* nullspace = app.add_subcommand("nullspace", "Print an orthonormal basis of the feasible velocity space");
  nullspace->add_option("-m,--mechanism", mechanism, "Builder name or mechanism description file")->required();

  std::string scenario, output, report, batch;
  bool verify = false;
  auto* sim = app.add_subcommand("simulate", "Simulate a scenario file and write its trajectory CSV");
  sim->add_option("scenario", scenario, "Scenario file");
  sim->add_option("-o,--output", output, "Trajectory CSV path (default: scenario outputs, else stdout)");
  sim->add_flag("--verify", verify, "Also run the verification checks");
  sim->add_option("--report", report, "Verification report path");
  sim->add_option("--batch", batch, "Run every *.json scenario in a directory");

  std::vector<std::string> checks;
  auto* ver = app.add_subcommand("verify", "Simulate a scenario and print its verification report");
  ver->add_option("scenario", scenario, "Scenario file")->required();
  ver->add_option("--report", report, "Write the report here and print a summary");
  ver->add_option("--check", checks, "Run only the named checks");

  std::string demo_name, csv;
  bool equal = false, output_driven = false, torque_driven = false;
  auto* demo = app.add_subcommand("demo", "Run a canonical demonstration");
  demo->add_option("name", demo_name, "2od, 3ood, initial, 2-2d or multi-axle")->required();
  demo->add_flag("--equal-loads", equal, "3ood: velocity-driven input, equal output loads (default)");
  demo->add_flag("--output-driven", output_driven, "3ood: locked input, O1 driven");
  demo->add_flag("--torque-driven", torque_driven, "3ood: torque-driven input");
  demo->add_option("--csv", csv, "3ood: write the trajectory CSV");
  demo->add_option("--report", report, "3ood: write the verification report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*dof) return cmd_dof(mechanism, as_json, out);
    if (*nullspace) return cmd_nullspace(mechanism, out);
    if (*sim) {
      if (!batch.empty()) {
        if (!scenario.empty() || !output.empty() || !report.empty()) {
          throw ValidationError("simulate: --batch takes no scenario, --output or --report");
        }
        return cmd_batch(batch, verify, out, err);
      }
      if (scenario.empty()) throw ValidationError("simulate: a scenario file or --batch is required");
      return cmd_simulate(scenario, output, verify, report, out, err);
    }
    if (*ver) return cmd_verify(scenario, report, checks, out);
    if (*demo) return cmd_demo(demo_name, equal, output_driven, torque_driven, csv, report, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const MissingTorqueError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace gearnet::cli
