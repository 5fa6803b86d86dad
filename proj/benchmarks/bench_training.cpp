#include <random>

#include <benchmark/benchmark.h>

#include "glassbox/explainer.hpp"
#include "glassbox/projection.hpp"

namespace {

using namespace glassbox;

// Two blobs split along f3, rows [0, n/2) selected.
Dataset blobs(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(20240521);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<FeatureColumn> cols(d);
  for (std::size_t j = 0; j < d; ++j) {
    cols[j].name = "f" + std::to_string(j);
    cols[j].values.resize(n);
    for (std::size_t i = 0; i < n; ++i) cols[j].values[i] = normal(rng) + (j == 3 && i >= n / 2 ? 6.0 : 0.0);
  }
  return Dataset("blobs", std::move(cols));
}

ClusterSelection first_half(std::size_t n) {
  std::vector<std::size_t> ids(n / 2);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return ClusterSelection(std::move(ids));
}

void BM_ExplainSelection(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ds = blobs(n, 10);
  const auto sel = first_half(n);
  TrainingConfig config;
  config.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(explain_selection(ds, sel, config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ExplainSelection)->Arg(500)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_CyclicBoostSingleBag(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ds = blobs(n, 10).with_quantile_bins(kDefaultMaxBins);
  const auto y = labels_from_selection(n, first_half(n));
  TrainingConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(cyclic_boost(ds, y, config));
}
BENCHMARK(BM_CyclicBoostSingleBag)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_PairScreening(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto ds = blobs(2000, d).with_quantile_bins(kDefaultMaxBins);
  const auto y = labels_from_selection(2000, first_half(2000));
  TrainingConfig config;
  config.sweeps = 20;
  const auto model = cyclic_boost(ds, y, config);
  for (auto _ : state) benchmark::DoNotOptimize(detect_top_interactions(ds, y, model, 4));
}
BENCHMARK(BM_PairScreening)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_PcaProject(benchmark::State& state) {
  const auto ds = blobs(static_cast<std::size_t>(state.range(0)), 20);
  for (auto _ : state) benchmark::DoNotOptimize(pca_project(ds));
}
BENCHMARK(BM_PcaProject)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_QuantileBinning(benchmark::State& state) {
  const auto ds = blobs(static_cast<std::size_t>(state.range(0)), 10);
  for (auto _ : state) benchmark::DoNotOptimize(ds.with_quantile_bins(kDefaultMaxBins));
}
BENCHMARK(BM_QuantileBinning)->Arg(2000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
