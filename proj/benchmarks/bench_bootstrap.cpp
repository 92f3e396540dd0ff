#include <benchmark/benchmark.h>

#include "bench_common.hpp"

namespace {

void BM_Analyze(benchmark::State& state) {
  const auto sim = bench::make_sim(400, 12);
  const auto input = sim.input();
  idid::AnalysisOptions opt;
  opt.bootstrap.replications = 200;
  opt.bootstrap.level = state.range(0) == 0 ? idid::ResampleLevel::unit : idid::ResampleLevel::cluster;
  opt.bootstrap.seed = 11;
  for (auto _ : state) benchmark::DoNotOptimize(idid::analyze(input, opt));
}
BENCHMARK(BM_Analyze)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DrawResample(benchmark::State& state) {
  std::vector<int> clusters(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < clusters.size(); ++i) clusters[i] = static_cast<int>(i % 5) + 1;
  std::uint64_t b = 0;
  for (auto _ : state) benchmark::DoNotOptimize(idid::draw_resample(clusters, idid::ResampleLevel::cluster, 1, b++));
}
BENCHMARK(BM_DrawResample)->Arg(1000)->Arg(10000);

}  // namespace
