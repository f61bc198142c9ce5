#include <benchmark/benchmark.h>

#include "bartsens/densities.hpp"

namespace {

using namespace bartsens;

void BM_QuadratureBuild(benchmark::State& state) {
  const ConfounderDensity d = ConfounderDensity::sharkfin(0.25, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(quadrature(d, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_QuadratureBuild)->Arg(16)->Arg(64)->Arg(256);

void BM_MarginalPair(benchmark::State& state) {
  const QuadratureRule rule =
      quadrature(ConfounderDensity::gaussian(0.0, 0.5), static_cast<int>(state.range(0)));
  double a = -1.3, b = 0.4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(marginal_pair(rule, a, b, PairMode::BothPositive));
    a += 1e-9;  // defeat caching of identical inputs
  }
}
BENCHMARK(BM_MarginalPair)->Arg(16)->Arg(64)->Arg(256);

}  // namespace
