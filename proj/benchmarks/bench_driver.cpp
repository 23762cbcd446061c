#include <benchmark/benchmark.h>

#include "osmm/driver.hpp"
#include "osmm/problems.hpp"

namespace {

// Whole solves at desk scale; one iteration of the benchmark loop is a full
// run from x0.
void BM_SolveKelly(benchmark::State& state) {
  const osmm::ProblemInstance inst = osmm::gen_kelly(50, 20000, 0);
  osmm::SolverConfig config;
  config.rank = state.range(0);
  config.memory = state.range(1);
  int iters = 0;
  for (auto _ : state) {
    osmm::Oracle oracle = inst.make_oracle();
    const osmm::SolveReport report = osmm::solve(oracle, inst.g, inst.x0, config);
    iters = report.iterations();
    benchmark::DoNotOptimize(report.h);
  }
  state.counters["iters"] = iters;
}
BENCHMARK(BM_SolveKelly)->Args({20, 20})->Args({0, 1})->Unit(benchmark::kMillisecond);

void BM_SolveDensity(benchmark::State& state) {
  const osmm::ProblemInstance inst = osmm::gen_density(10000, 2000, 0);
  for (auto _ : state) {
    osmm::Oracle oracle = inst.make_oracle();
    benchmark::DoNotOptimize(osmm::solve(oracle, inst.g, inst.x0).h);
  }
}
BENCHMARK(BM_SolveDensity)->Unit(benchmark::kMillisecond);

}  // namespace
