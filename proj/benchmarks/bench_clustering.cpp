#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "idid/clustering.hpp"

namespace {

idid::FeatureMatrix random_features(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  idid::FeatureMatrix f;
  for (std::size_t i = 0; i < n; ++i) f.units.push_back("u" + std::to_string(i));
  for (std::size_t j = 0; j < d; ++j) {
    f.names.push_back("f" + std::to_string(j));
    std::vector<double> col(n);
    for (auto& v : col) v = z(rng);
    f.columns.push_back(std::move(col));
  }
  return f;
}

void BM_CompleteLinkage(benchmark::State& state) {
  const auto f = idid::standardize(random_features(static_cast<std::size_t>(state.range(0)), 3));
  for (auto _ : state) benchmark::DoNotOptimize(idid::complete_linkage(f));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CompleteLinkage)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_Cut(benchmark::State& state) {
  const auto tree = idid::complete_linkage(idid::standardize(random_features(1024, 3)));
  for (auto _ : state) benchmark::DoNotOptimize(idid::cut(tree, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Cut)->Arg(3)->Arg(50);

}  // namespace
