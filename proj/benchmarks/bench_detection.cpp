// Microbenchmarks for the split searches on the feature-addition benchmark
// at a few problem sizes.

#include <benchmark/benchmark.h>

#include "cpd/detection.hpp"
#include "cpd/synthetic.hpp"

namespace {

using cpd::FeatureView;
using cpd::LearnerFamily;

cpd::SearchConfig config_for(const cpd::TimeSeriesDataset& data) {
  cpd::SearchConfig cfg;
  cfg.learner1 = {LearnerFamily::LeastSquares, {}, data.old_features + 1,
                  FeatureView::OldOnly};
  cfg.learner2 = {LearnerFamily::LeastSquares, {}, data.dim() + 1,
                  FeatureView::All};
  return cfg;
}

cpd::TimeSeriesDataset dataset(const benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  return cpd::generate_feature_addition(m, d, 5, m / 2, 0.05, 42);
}

void BM_FullSearch(benchmark::State& state) {
  const auto data = dataset(state);
  const auto cfg = config_for(data);
  for (auto _ : state) benchmark::DoNotOptimize(cpd::sas_detect(data, cfg));
  state.SetComplexityN(state.range(0));
}

void BM_GridSearch(benchmark::State& state) {
  const auto data = dataset(state);
  const auto cfg = config_for(data);
  for (auto _ : state) benchmark::DoNotOptimize(cpd::sas_grid_detect(data, cfg));
}

void BM_CorrectedGridSearch(benchmark::State& state) {
  const auto data = dataset(state);
  const auto cfg = config_for(data);
  for (auto _ : state) benchmark::DoNotOptimize(cpd::sasf_detect(data, cfg));
}

void BM_MultiChangeDp(benchmark::State& state) {
  const auto data = dataset(state);
  const std::vector<cpd::LearnerSpec> specs(
      3, cpd::LearnerSpec{LearnerFamily::LeastSquares, {}, 2, FeatureView::All});
  for (auto _ : state)
    benchmark::DoNotOptimize(
        cpd::multi_change_detect(data, 2, specs, cpd::CandidateKind::SqrtGrid));
}

}  // namespace

BENCHMARK(BM_FullSearch)
    ->Args({500, 20})
    ->Args({2000, 20})
    ->Args({2000, 100})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridSearch)
    ->Args({500, 20})
    ->Args({2000, 20})
    ->Args({2000, 100})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorrectedGridSearch)
    ->Args({500, 20})
    ->Args({2000, 20})
    ->Args({2000, 100})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MultiChangeDp)->Args({1000, 10})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
