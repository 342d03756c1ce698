#include <benchmark/benchmark.h>

#include "mcmix/em.hpp"
#include "mcmix/evaluation.hpp"
#include "mcmix/generator.hpp"
#include "mcmix/sampling.hpp"
#include "mcmix/spectral.hpp"

namespace {

using namespace mcmix;

void BM_CaSvdExact(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const Mixture m = generate_mixture({20, 3, r, 1, true, 2});
  const TrailDistribution d = exact_trail_distribution(m);
  for (auto _ : state) benchmark::DoNotOptimize(ca_svd(d, 3));
}
BENCHMARK(BM_CaSvdExact)->Arg(3)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_GkvSvdExact(benchmark::State& state) {
  const Mixture m = generate_mixture({20, 3, 3, 1, true, 2});
  const TrailDistribution d = exact_trail_distribution(m);
  for (auto _ : state) benchmark::DoNotOptimize(gkv_svd(d, 3));
}
BENCHMARK(BM_GkvSvdExact)->Unit(benchmark::kMillisecond);

void BM_EmIteration(benchmark::State& state) {
  const Mixture m = generate_mixture({20, 3, 6, 1, true, 2});
  const TrailDistribution d = exact_trail_distribution(m);
  EmConfig cfg;
  cfg.max_iters = 10;
  cfg.tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(em_fit(d, 3, cfg));
}
BENCHMARK(BM_EmIteration)->Unit(benchmark::kMillisecond);

void BM_Sampling(benchmark::State& state) {
  const Mixture m = generate_mixture({20, 3, 6, 1, true, 2});
  const auto count = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_distribution(m, count, 7));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Sampling)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_Hungarian(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  const Matrix cost = random_stochastic(L, L, rng);
  for (auto _ : state) benchmark::DoNotOptimize(hungarian(cost));
}
BENCHMARK(BM_Hungarian)->Arg(3)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
