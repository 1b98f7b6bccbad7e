#include <benchmark/benchmark.h>

#include <filesystem>

#include "goalalign/alignment.hpp"
#include "goalalign/harness.hpp"
#include "goalalign/pddl.hpp"
#include "goalalign/planner.hpp"

using namespace goalalign;

namespace {

const std::filesystem::path kData(GOALALIGN_DATA_DIR);

harness::Scenario load(const std::string& family, const std::string& problem) {
  harness::InstanceSpec spec;
  spec.id = family + "-" + problem;
  spec.domain = kData / family / "domain.pddl";
  spec.problem = kData / family / (problem + ".pddl");
  return harness::load_scenario(spec, {});
}

const harness::Scenario& cached(int which) {
  static const harness::Scenario scenarios[] = {
      load("blocksworld", "p01"), load("blocksworld", "p02"), load("blocksworld", "p03"),
      load("logistics", "p01"),   load("logistics", "p02"),   load("gripper", "p02"),
  };
  return scenarios[which];
}

void BM_AStar(benchmark::State& state) {
  const auto& sc = cached(static_cast<int>(state.range(0)));
  state.SetLabel(sc.id);
  for (auto _ : state) benchmark::DoNotOptimize(search::optimal_plan(sc.robot.task));
}
BENCHMARK(BM_AStar)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

void BM_Hmax(benchmark::State& state) {
  const auto& sc = cached(static_cast<int>(state.range(0)));
  state.SetLabel(sc.id);
  for (auto _ : state) benchmark::DoNotOptimize(search::hmax(sc.robot.task, sc.robot.task.init));
}
BENCHMARK(BM_Hmax)->DenseRange(0, 5);

void BM_Belief(benchmark::State& state) {
  const auto& sc = cached(static_cast<int>(state.range(0)));
  state.SetLabel(sc.id);
  search::AStarPlanner planner;
  harness::ScenarioConfig config;
  config.seed = 3;
  auto generated = harness::generate_instance(sc.robot.task, config, 0, planner);
  for (auto _ : state) benchmark::DoNotOptimize(align::compute_belief(generated.instance, planner));
}
BENCHMARK(BM_Belief)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
