#include <benchmark/benchmark.h>

#include <vector>

#include "lyap/linalg.hpp"
#include "lyap/rng.hpp"

namespace {

std::vector<lyap::Matrix> random_batch(std::size_t m, std::size_t count) {
  lyap::Rng rng(m * 1000 + count);
  std::vector<lyap::Matrix> out;
  for (std::size_t i = 0; i < count; ++i) {
    lyap::Matrix g(m);
    for (auto& v : g.data()) v = rng.normal();
    out.push_back(std::move(g));
  }
  return out;
}

void BM_OpNorm(benchmark::State& state) {
  const auto batch = random_batch(state.range(0), 64);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(lyap::op_norm(batch[i++ % batch.size()]));
}
BENCHMARK(BM_OpNorm)->DenseRange(2, 6);

void BM_SingularValues(benchmark::State& state) {
  const auto batch = random_batch(state.range(0), 64);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(lyap::singular_values(batch[i++ % batch.size()]));
}
BENCHMARK(BM_SingularValues)->DenseRange(2, 6);

void BM_ExteriorPower(benchmark::State& state) {
  const auto batch = random_batch(state.range(0), 16);
  const auto k = static_cast<std::size_t>(state.range(1));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(lyap::exterior_power(batch[i++ % batch.size()], k));
}
BENCHMARK(BM_ExteriorPower)->Args({3, 2})->Args({4, 2})->Args({5, 2})->Args({6, 3})->Args({8, 4});

void BM_Multiply(benchmark::State& state) {
  const auto batch = random_batch(state.range(0), 2);
  lyap::Matrix out(batch[0].dim());
  for (auto _ : state) {
    lyap::multiply_into(batch[0], batch[1], out);
    benchmark::DoNotOptimize(out.data().data());
  }
}
BENCHMARK(BM_Multiply)->DenseRange(2, 8, 2);

}  // namespace

BENCHMARK_MAIN();
