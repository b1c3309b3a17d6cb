#include <benchmark/benchmark.h>

#include "gearnet/builders.hpp"
#include "gearnet/cli/demos.hpp"
#include "gearnet/kinematics.hpp"
#include "gearnet/verification.hpp"

using namespace gearnet;

static void BM_Mobility3ood(benchmark::State& state) {
  const auto g = build_3ood();
  for (auto _ : state) benchmark::DoNotOptimize(mobility(g));
}
BENCHMARK(BM_Mobility3ood);

static void BM_Step3ood(benchmark::State& state) {
  const ConstrainedSystem system(cli::demo_3ood_scenario(cli::Demo3ood::equal_loads));
  State s = system.initial_state();
  for (auto _ : state) {
    s = system.step(s);
    benchmark::DoNotOptimize(s.velocity.data());
  }
}
BENCHMARK(BM_Step3ood);

static void BM_Simulate3ood(benchmark::State& state) {
  auto scenario = cli::demo_3ood_scenario(cli::Demo3ood::equal_loads);
  scenario.duration = 0.1;
  scenario.record_torques = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(scenario));
}
BENCHMARK(BM_Simulate3ood)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Verify3ood(benchmark::State& state) {
  auto scenario = cli::demo_3ood_scenario(cli::Demo3ood::equal_loads);
  scenario.duration = 0.1;
  const auto trajectory = simulate(scenario);
  const auto context = context_for(scenario);
  for (auto _ : state) benchmark::DoNotOptimize(check_invariants(trajectory, *scenario.graph, context));
}
BENCHMARK(BM_Verify3ood)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
