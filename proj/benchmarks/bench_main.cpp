#include <benchmark/benchmark.h>

#include "augtest/estimators.hpp"
#include "augtest/flattening.hpp"
#include "augtest/testers.hpp"

using namespace augtest;

namespace {

void BM_DrawSamples(benchmark::State& state) {
  const auto p = JointDistribution::uniform(ProductDomain({static_cast<std::size_t>(state.range(0)), 16}));
  const auto sampler = make_sampler(p);
  Rng rng(1);
  for (auto _ : state) {
    for (int i = 0; i < 1024; ++i) benchmark::DoNotOptimize(sampler.draw(rng));
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_DrawSamples)->Arg(16)->Arg(256)->Arg(4096);

void BM_Poisson(benchmark::State& state) {
  Rng rng(2);
  const double mean = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(poisson(mean, rng));
}
BENCHMARK(BM_Poisson)->Arg(5)->Arg(500)->Arg(50000);

void BM_FlattenSample(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<std::size_t> b(n, 3);
  ProductFlattening f({AxisFlattening(b), AxisFlattening(std::vector<std::size_t>(8, 2))});
  Rng rng(3);
  const Index x = f.base_domain().size() / 2;
  for (auto _ : state) benchmark::DoNotOptimize(f.flatten(x, rng));
}
BENCHMARK(BM_FlattenSample)->Arg(64)->Arg(4096);

void BM_Tester2dUniform(benchmark::State& state) {
  const auto p = JointDistribution::uniform(ProductDomain({20, 10}));
  const auto sampler = make_sampler(p);
  const auto cfg = TesterConfig::make(0.5, 0.1, Profile::Practical, 0.1);
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(aug_independence_2d(sampler, p, cfg, rng));
}
BENCHMARK(BM_Tester2dUniform)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
