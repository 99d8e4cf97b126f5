#include <benchmark/benchmark.h>

#include <vector>

#include "divtest/asymptotics.hpp"
#include "divtest/exact_engine.hpp"
#include "divtest/genchisq.hpp"
#include "divtest/montecarlo.hpp"

using namespace divtest;

namespace {

void BM_EnumerateTypes(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_types(n, 4));
}
BENCHMARK(BM_EnumerateTypes)->Arg(10)->Arg(20)->Arg(40);

// Full k=2 type-pair enumeration; (n+1)^2 pairs.
void BM_StatisticDistribution(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Distribution p({0.5, 0.5});
  for (auto _ : state) benchmark::DoNotOptimize(statistic_distribution(DivergenceSpec::js(), p, n));
  state.SetItemsProcessed(state.iterations() * (n + 1) * (n + 1));
}
BENCHMARK(BM_StatisticDistribution)->Arg(40)->Arg(160)->Arg(320)->Unit(benchmark::kMillisecond);

void BM_StatisticDistributionK3(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Distribution p({0.2, 0.3, 0.5});
  for (auto _ : state) benchmark::DoNotOptimize(statistic_distribution(DivergenceSpec::kl(), p, n));
}
BENCHMARK(BM_StatisticDistributionK3)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ImhofTail(benchmark::State& state) {
  const std::vector<double> w = {0.9, 0.4, 0.15, 0.05};
  const double c = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(imhof_tail(w, c));
}
BENCHMARK(BM_ImhofTail)->Arg(1)->Arg(10)->Arg(50);

void BM_McError(benchmark::State& state) {
  const Distribution p1({0.5, 0.5}), p2({0.9, 0.1});
  const std::uint64_t trials = 100000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mc_error(DivergenceSpec::js(), 0.02, p1, p2, 80, trials, 7, ErrorType::Type2));
  }
  state.SetItemsProcessed(state.iterations() * trials);
}
BENCHMARK(BM_McError)->Unit(benchmark::kMillisecond);

void BM_KktMinimizer(benchmark::State& state) {
  const Distribution p({0.2, 0.3, 0.5}), p1({0.4, 0.4, 0.2}), p2({0.1, 0.2, 0.7});
  for (auto _ : state) benchmark::DoNotOptimize(kkt_minimizer(p, p1, p2, 0.01));
}
BENCHMARK(BM_KktMinimizer);

}  // namespace

BENCHMARK_MAIN();
