#include <benchmark/benchmark.h>

#include "digs/metrics.hpp"
#include "digs/target_factory.hpp"

namespace {

using namespace digs;

void BM_MmdBiased(benchmark::State& state) {
  const auto bundle = make_target(presets::mog9());
  const auto n = static_cast<int>(state.range(0));
  const auto a = ground_truth(*bundle.mixture, n, 1), b = ground_truth(*bundle.mixture, n, 2);
  MmdConfig cfg;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(mmd(a, b, cfg));
  state.SetComplexityN(n);
}
BENCHMARK(BM_MmdBiased)->Arg(250)->Arg(1000)->Complexity(benchmark::oNSquared);

void BM_MmdAgainstCachedReference(benchmark::State& state) {
  const auto bundle = make_target(presets::mog9());
  MmdConfig cfg;
  cfg.estimator = MmdEstimator::unbiased;
  cfg.threads = 1;
  const MmdReference ref(ground_truth(*bundle.mixture, 10000, 1), cfg);
  const auto samples = ground_truth(*bundle.mixture, 1000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ref.distance(samples));
}
BENCHMARK(BM_MmdAgainstCachedReference)->Unit(benchmark::kMillisecond);

void BM_ModeCoverage(benchmark::State& state) {
  const auto bundle = make_target(presets::mog40());
  const auto samples = ground_truth(*bundle.mixture, 1000, 3);
  const auto modes = bundle.mixture->means();
  for (auto _ : state) benchmark::DoNotOptimize(mode_coverage(samples, modes, 3.0));
}
BENCHMARK(BM_ModeCoverage);

}  // namespace
