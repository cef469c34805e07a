#include <benchmark/benchmark.h>

#include "lyap/avalanche.hpp"
#include "lyap/cocycle.hpp"
#include "lyap/io.hpp"
#include "lyap/multiscale.hpp"

namespace {

void BM_Iterate(benchmark::State& state) {
  const auto sys = lyap::reference_system();
  const auto A = lyap::reference_cocycle();
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(lyap::iterate(A, sys, lyap::sample_phase(sys, seed++), n).log_norm);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Iterate)->RangeMultiplier(10)->Range(10, 10000);

void BM_FiniteScaleLE(benchmark::State& state) {
  const auto sys = lyap::reference_system();
  const auto A = lyap::reference_cocycle();
  const auto workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lyap::finite_scale_le(A, sys, 100, 1, {2000, 1, workers}).value);
}
BENCHMARK(BM_FiniteScaleLE)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_ExactEnumeration(benchmark::State& state) {
  const auto sys = lyap::reference_system();
  const auto A = lyap::reference_cocycle();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lyap::finite_scale_le_exact(A, sys, n, 1));
}
BENCHMARK(BM_ExactEnumeration)->DenseRange(8, 16, 4)->Unit(benchmark::kMillisecond);

void BM_ApDefect(benchmark::State& state) {
  const lyap::APHypotheses hyp;
  const auto chain = lyap::hyperbolic_chain(static_cast<std::size_t>(state.range(0)), hyp, 3);
  for (auto _ : state) benchmark::DoNotOptimize(lyap::ap_defect(chain));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ApDefect)->RangeMultiplier(4)->Range(2, 512);

void BM_BlockwiseAP(benchmark::State& state) {
  const auto sys = lyap::reference_system();
  const auto B = lyap::reference_cocycle();
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(lyap::blockwise_ap_log_norm(B, sys, lyap::sample_phase(sys, seed++), 30, 30).predicted);
}
BENCHMARK(BM_BlockwiseAP);

}  // namespace

BENCHMARK_MAIN();
