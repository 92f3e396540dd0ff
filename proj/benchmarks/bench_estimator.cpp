#include <benchmark/benchmark.h>

#include "bench_common.hpp"

namespace {

void BM_PointEstimates(benchmark::State& state) {
  const auto sim = bench::make_sim(static_cast<int>(state.range(0)), 12);
  const auto input = sim.input();
  idid::AnalysisOptions opt;
  opt.run_bootstrap = false;
  for (auto _ : state) benchmark::DoNotOptimize(idid::point_estimates(input, opt));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PointEstimates)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_PointEstimatesResidualized(benchmark::State& state) {
  const auto sim = bench::make_sim(static_cast<int>(state.range(0)), 12);
  const auto input = sim.input(true);
  idid::AnalysisOptions opt;
  opt.run_bootstrap = false;
  opt.residualize.variant = idid::ControlVariant::quadratic;
  for (auto _ : state) benchmark::DoNotOptimize(idid::point_estimates(input, opt));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PointEstimatesResidualized)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_ComputeCellsAudited(benchmark::State& state) {
  const auto sim = bench::make_sim(static_cast<int>(state.range(0)), 12);
  const auto sample = idid::make_sample(sim.paths, sim.profiles, sim.sim.truth.clusters,
                                        idid::OutcomeChanges::from_levels(sim.sim.panel.outcome(idid::DgpColumns::outcome)));
  for (auto _ : state) {
    std::vector<idid::ContrastUse> audit;
    benchmark::DoNotOptimize(idid::compute_cells(sample, {7, 3, 1}, &audit));
  }
}
BENCHMARK(BM_ComputeCellsAudited)->Arg(256)->Arg(1024);

}  // namespace
