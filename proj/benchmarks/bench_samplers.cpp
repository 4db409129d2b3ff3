#include <benchmark/benchmark.h>

#include "digs/digs_sampler.hpp"
#include "digs/parallel_tempering.hpp"
#include "digs/target_factory.hpp"

namespace {

using namespace digs;

void BM_Mog40EnergyGradient(benchmark::State& state) {
  const auto bundle = make_target(presets::mog40());
  Point x = Point::Constant(2, 3.0), g(2);
  for (auto _ : state) benchmark::DoNotOptimize(bundle.target->energy_and_gradient(x, g));
}
BENCHMARK(BM_Mog40EnergyGradient);

void BM_BnnEnergyGradient(benchmark::State& state) {
  const auto bundle = make_target(presets::bnn_toy());
  Point g(bundle.target->dim());
  for (auto _ : state) benchmark::DoNotOptimize(bundle.target->energy_and_gradient(*bundle.bnn_init, g));
}
BENCHMARK(BM_BnnEnergyGradient);

void BM_MalaStep(benchmark::State& state) {
  const auto bundle = make_target(presets::mog9());
  Rng rng(1);
  auto s = make_state(*bundle.target, Point::Zero(2));
  for (auto _ : state) benchmark::DoNotOptimize(mala_step(s, *bundle.target, 1e-3, rng));
}
BENCHMARK(BM_MalaStep);

void BM_DigsSweep(benchmark::State& state) {
  const auto bundle = make_target(presets::mog9());
  Rng rng(2);
  auto s = make_state(*bundle.target, Point::Zero(2));
  DenoiserConfig den;
  for (auto _ : state)
    digs_sweep(s, *bundle.target, {1.0, 1.0}, static_cast<int>(state.range(0)), InitStrategy::mh, den, rng, nullptr);
}
BENCHMARK(BM_DigsSweep)->Arg(5)->Arg(10);

void BM_PtSample(benchmark::State& state) {
  const auto bundle = make_target(presets::mog40());
  PtConfig cfg;
  cfg.inner.iterations_per_sample = 1;
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(pt_run(*bundle.target, cfg, 1, Point::Zero(2), rng));
}
BENCHMARK(BM_PtSample);

}  // namespace

BENCHMARK_MAIN();
