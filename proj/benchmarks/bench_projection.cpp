#include <benchmark/benchmark.h>

#include "bartsens/projection.hpp"

namespace {

using namespace bartsens;

void BM_SolveStructural(benchmark::State& state) {
  const QuadratureRule rule = quadrature(ConfounderDensity::gaussian(0.0, 0.5), 64);
  const CellTargets t{marginal_pair(rule, 0.2, -0.4, PairMode::BothPositive),
                      marginal_pair(rule, 0.2, -1.2, PairMode::FirstComplement),
                      marginal_pair(rule, 0.2, -0.4, PairMode::SecondComplement)};
  std::uint64_t key = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_structural(t, rule, {}, key++));
  }
  state.SetLabel("one per-observation projection solve");
}
BENCHMARK(BM_SolveStructural)->Unit(benchmark::kMicrosecond);

}  // namespace
