#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gearnet/cli/app.hpp"
#include "gearnet/cli/scenario_file.hpp"

namespace fs = std::filesystem;
using namespace gearnet;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "gearnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gearnet_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kEqualLoads = R"({
  "mechanism": {"builder": "3ood"},
  "drive": {"mode": "velocity", "shaft": "I", "value": 20},
  "loads": {"O1": {"type": "viscous", "b": 1}, "O2": {"type": "viscous", "b": 1}, "O3": {"type": "viscous", "b": 1}},
  "sim": {"duration": 0.02}
})";

}  // namespace

TEST_CASE("dof prints key=value lines") {
  const auto r = run({"dof", "-m", "3ood"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("nullity=4\n") != std::string::npos);
  CHECK(r.out.find("external_dof=3\n") != std::string::npos);
  CHECK(r.out.find("n_shafts=22\n") != std::string::npos);
  const auto j = run({"dof", "-m", "initial", "--json"});
  CHECK(j.out.find("\"nullity\": 1") != std::string::npos);
  CHECK(run({"dof", "-m", "bogus"}).code == cli::kExitValidation);
  CHECK(run({"nullspace", "-m", "2od"}).code == cli::kExitOk);
}

TEST_CASE("missing and malformed scenario files exit 1") {
  const auto missing = run({"simulate", "/nonexistent/missing.json"});
  CHECK(missing.code == cli::kExitValidation);
  CHECK(missing.err.find("file not found") != std::string::npos);

  const auto dir = scratch("malformed");
  write(dir / "bad.json", "{\n  \"drive\": {\"mode\": \"velocity\",,}\n}");
  const auto bad = run({"simulate", (dir / "bad.json").string()});
  CHECK(bad.code == cli::kExitValidation);
  CHECK(bad.err.find("line 2") != std::string::npos);

  write(dir / "field.json", R"({"mechanism": {"builder": "2od"}, "drive": {"mode": "torque", "shaft": "R", "value": 1},
    "sim": {"duration": 0.01, "stepsize": 1}})");
  const auto field = run({"simulate", (dir / "field.json").string()});
  CHECK(field.code == cli::kExitValidation);
  CHECK(field.err.find("/sim/stepsize") != std::string::npos);
}

TEST_CASE("scenario parsing") {
  const auto f = cli::parse_scenario(R"({
    "mechanism": {"builder": "2od", "params": {"ring_inertia": 2}},
    "drive": {"mode": "velocity", "shaft": "R", "series": [[0, 0], [0.1, 5]]},
    "loads": {"S1": {"type": "resistive", "tau_r": 0.2}, "S2": {"type": "torque", "value": -1}},
    "initial": {"S1": 0.5},
    "sim": {"duration": 0.2, "dt": 1e-3, "integrator": "rk4", "record_torques": false},
    "outputs": {"trajectory": "out.csv"}
  })", "/tmp/base");
  const auto& s = f.scenario;
  CHECK(s.graph->shaft(s.graph->shaft_id("R")).inertia == 2.0);
  CHECK(std::holds_alternative<VelocityDriven>(s.drive));
  CHECK(std::get<VelocityDriven>(s.drive).omega(0.05) == doctest::Approx(2.5));
  CHECK(s.integrator == Integrator::rk4);
  CHECK_FALSE(s.record_torques);
  CHECK(s.timestep == 1e-3);
  CHECK(s.initial_velocity.size() == 1);
  CHECK(std::holds_alternative<ConstantResistive>(s.loads.at(s.graph->shaft_id("S1"))));
  CHECK(f.trajectory_path == fs::path("/tmp/base/out.csv"));
  CHECK_THROWS_AS(cli::parse_scenario(R"({"mechanism": {"builder": "2od"}, "drive": {"mode": "spin", "shaft": "R"}})"),
                  DescriptionError);
}

TEST_CASE("simulate writes bit-identical CSV across runs and verifies") {
  const auto dir = scratch("simulate");
  write(dir / "equal.json", kEqualLoads);
  const auto a = run({"simulate", (dir / "equal.json").string(), "-o", (dir / "a.csv").string()});
  const auto b = run({"simulate", (dir / "equal.json").string(), "-o", (dir / "b.csv").string(), "--verify",
                      "--report", (dir / "r.json").string()});
  CHECK(a.code == cli::kExitOk);
  CHECK(b.code == cli::kExitOk);
  const std::string csv = slurp(dir / "a.csv");
  CHECK(csv.rfind("t,I.omega,I.alpha,", 0) == 0);
  CHECK(csv == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "r.json").find("output_speed_sum") != std::string::npos);

  const auto v = run({"verify", (dir / "equal.json").string(), "--check", "output_speed_sum"});
  CHECK(v.code == cli::kExitOk);
  CHECK(v.out.find("\"check\": \"output_speed_sum\"") != std::string::npos);
  const auto summary = run({"verify", (dir / "equal.json").string(), "--report", (dir / "v.json").string()});
  CHECK(summary.out.find("PASS output_speed_sum") != std::string::npos);
}

TEST_CASE("failed verification exits 3 and solver failures exit 2") {
  const auto dir = scratch("codes");
  write(dir / "locked.json", R"({
    "mechanism": {"builder": "3ood"},
    "drive": {"mode": "locked", "shaft": "I"},
    "sources": {"O1": {"type": "flow", "value": 3}},
    "loads": {"O2": {"type": "viscous", "b": 1}, "O3": {"type": "viscous", "b": 1}},
    "sim": {"duration": 0.01}
  })");
  const auto locked = run({"verify", (dir / "locked.json").string(), "--report", (dir / "l.json").string()});
  CHECK(locked.code == cli::kExitVerification);
  CHECK(locked.out.find("FAIL output_driven_torque") != std::string::npos);

  write(dir / "conflict.json", R"({
    "mechanism": {"builder": "2od"},
    "drive": {"mode": "velocity", "shaft": "R", "value": 10},
    "loads": {"S1": {"type": "locked"}, "S2": {"type": "locked"}},
    "sim": {"duration": 0.01}
  })");
  CHECK(run({"simulate", (dir / "conflict.json").string(), "-o", (dir / "c.csv").string()}).code ==
        cli::kExitSolver);
}

TEST_CASE("batch mode runs every scenario in a directory") {
  const auto dir = scratch("batch");
  write(dir / "one.json", kEqualLoads);
  write(dir / "two.json", R"({"mechanism": {"builder": "2od"}, "drive": {"mode": "torque", "shaft": "R", "value": 1},
    "sim": {"duration": 0.01}})");
  const auto r = run({"simulate", "--batch", dir.string(), "--verify"});
  CHECK(r.code == cli::kExitOk);
  CHECK(fs::exists(dir / "one.csv"));
  CHECK(fs::exists(dir / "two.csv"));
  CHECK(fs::exists(dir / "one.report.json"));
  CHECK(r.out.find("one.json") < r.out.find("two.json"));
}

TEST_CASE("demos run") {
  CHECK(run({"demo", "3ood"}).code == cli::kExitOk);
  CHECK(run({"demo", "3ood", "--output-driven"}).code == cli::kExitVerification);
  for (auto name : {"2od", "initial", "2-2d", "multi-axle"}) CHECK(run({"demo", name}).code == cli::kExitOk);
  CHECK(run({"demo", "2od", "--torque-driven"}).code == cli::kExitValidation);
}
