#include <benchmark/benchmark.h>

#include "bartsens/probit_bart.hpp"

namespace {

using namespace bartsens;

Matrix uniform_matrix(int n, int p, Rng& rng) {
  Matrix x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = 2.0 * rng.uniform() - 1.0;
  return x;
}

void BM_TruncatedNormal(benchmark::State& state) {
  Rng rng(1);
  double acc = 0.0;
  for (auto _ : state) acc += truncated_normal_above(rng, -2.0, 0.0);
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_TruncatedNormal);

void BM_ProbitSweep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(2);
  const Matrix x = uniform_matrix(n, 5, rng);
  std::vector<std::int8_t> y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.uniform() < 0.3 ? 1 : 0;
  BartConfig cfg;
  cfg.tree_count = 100;
  cfg.cutpoint_count = 100;
  const CutpointGrid grid = build_cutpoints(x, cfg.cutpoint_count);
  ProbitBartSampler sampler(x, grid, cfg, 0.0, 3);
  for (auto _ : state) sampler.sweep(y);
  state.SetItemsProcessed(state.iterations() * n * cfg.tree_count);
}
BENCHMARK(BM_ProbitSweep)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
