// Monte-Carlo MSE estimate: serial reference vs the OpenMP path loop.

#include <benchmark/benchmark.h>

#include "sgdrates/exact_error.hpp"
#include "sgdrates/simulator.hpp"

namespace {

sgdrates::SimulationPlan make_plan(std::size_t dim, bool gaussian) {
  using namespace sgdrates;
  const Vector mean(dim, 0.0);
  NoiseModel noise = gaussian ? NoiseModel::gaussian(mean, 1.0) : NoiseModel::two_point(mean, Vector(dim, 1.0));
  ProblemSpec spec(1.0, 1.0, 1.0, Vector(dim, 1.0), std::move(noise));
  return SimulationPlan(std::move(spec), dyadic_checkpoints(10), 4000, 42);
}

void BM_Serial(benchmark::State& state) {
  const auto plan = make_plan(static_cast<std::size_t>(state.range(0)), state.range(1) != 0);
  for (auto _ : state) benchmark::DoNotOptimize(sgdrates::mc_mse_estimate_serial(plan));
  state.SetItemsProcessed(state.iterations() * 4000 * 1024);
}

void BM_Parallel(benchmark::State& state) {
  const auto plan = make_plan(static_cast<std::size_t>(state.range(0)), state.range(1) != 0);
  const int threads = static_cast<int>(state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(sgdrates::mc_mse_estimate(plan, threads));
  state.SetItemsProcessed(state.iterations() * 4000 * 1024);
}

}  // namespace

// Args: dimension, gaussian noise (0/1)[, threads]
BENCHMARK(BM_Serial)->Args({1, 0})->Args({4, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Parallel)
    ->Args({1, 0, 1})
    ->Args({1, 0, 2})
    ->Args({1, 0, 4})
    ->Args({4, 1, 1})
    ->Args({4, 1, 4})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
