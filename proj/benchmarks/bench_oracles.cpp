#include <benchmark/benchmark.h>

#include "osmm/problems.hpp"
#include "osmm/risk.hpp"

namespace {

osmm::ProblemInstance make(int which, Eigen::Index samples) {
  switch (which) {
    case 0: return osmm::gen_kelly(50, samples, 0);
    case 1: return osmm::gen_cvar_portfolio(20, samples, 0);
    case 2: return osmm::gen_newsvendor(40, samples, 0);
    default: return osmm::gen_density(samples, 2000, 0);
  }
}

constexpr const char* kNames[] = {"kelly", "cvar", "newsvendor", "density"};

void BM_OracleValueGradient(benchmark::State& state) {
  const int which = static_cast<int>(state.range(0));
  const osmm::ProblemInstance inst = make(which, state.range(1));
  osmm::Oracle oracle = inst.make_oracle();
  for (auto _ : state) {
    const osmm::OracleEval ev = oracle.evaluate(inst.x0);
    benchmark::DoNotOptimize(ev.value);
  }
  state.SetLabel(kNames[which]);
}
BENCHMARK(BM_OracleValueGradient)
    ->ArgsProduct({{0, 1, 2}, {20000, 200000}})
    ->Args({3, 10000})
    ->Unit(benchmark::kMicrosecond);

void BM_OracleValue(benchmark::State& state) {
  const int which = static_cast<int>(state.range(0));
  const osmm::ProblemInstance inst = make(which, state.range(1));
  osmm::Oracle oracle = inst.make_oracle();
  for (auto _ : state) benchmark::DoNotOptimize(oracle.value(inst.x0));
  state.SetLabel(kNames[which]);
}
BENCHMARK(BM_OracleValue)->ArgsProduct({{0, 1, 2}, {20000}})->Unit(benchmark::kMicrosecond);

void BM_EmpiricalRisks(benchmark::State& state) {
  osmm::Rng rng(3);
  osmm::Vector losses(state.range(0));
  for (Eigen::Index i = 0; i < losses.size(); ++i) losses(i) = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(osmm::empirical_risks(losses, 0.9).evar);
}
BENCHMARK(BM_EmpiricalRisks)->Arg(1000)->Arg(20000)->Unit(benchmark::kMicrosecond);

}  // namespace
