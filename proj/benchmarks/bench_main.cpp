#include <benchmark/benchmark.h>

#include "d2dcache/analytic.hpp"
#include "d2dcache/model.hpp"
#include "d2dcache/optimizer.hpp"
#include "d2dcache/simulator.hpp"

using namespace d2dcache;

namespace {

void BM_LaplaceExact(benchmark::State& state) {
  const auto cfg = NetworkConfig::defaults();
  QuadratureSpec quad;
  const double t = std::pow(cfg.sigma, cfg.alpha);
  for (auto _ : state) benchmark::DoNotOptimize(laplace_exact(t, cfg, quad));
}
BENCHMARK(BM_LaplaceExact);

void BM_LaplaceTableLookup(benchmark::State& state) {
  const auto cfg = NetworkConfig::defaults();
  const auto table = shared_laplace_table(cfg.n_bar, cfg.alpha, QuadratureSpec{});
  double t = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(table->laplace(t, cfg));
    t = t < 1e12 ? t * 1.7 : 1.0;
  }
}
BENCHMARK(BM_LaplaceTableLookup);

void BM_CoverageEvaluatorBuild(benchmark::State& state) {
  const auto cfg = NetworkConfig::defaults();
  QuadratureSpec quad;
  shared_laplace_table(cfg.n_bar, cfg.alpha, quad);
  for (auto _ : state) {
    CoverageEvaluator eval(cfg, quad, CoverageMethod::exact_tcp);
    benchmark::DoNotOptimize(eval(0.5).value);
  }
}
BENCHMARK(BM_CoverageEvaluatorBuild)->Unit(benchmark::kMillisecond);

void BM_CoverageEvaluatorQuery(benchmark::State& state) {
  const auto cfg = NetworkConfig::defaults();
  CoverageEvaluator eval(cfg, QuadratureSpec{}, CoverageMethod::exact_tcp);
  double c = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval(c).value);
    c = c < 0.99 ? c + 0.01 : 0.01;
  }
}
BENCHMARK(BM_CoverageEvaluatorQuery);

void BM_SolveP1(benchmark::State& state) {
  const auto cfg = NetworkConfig::defaults();
  ContentLibrary lib(static_cast<std::size_t>(state.range(0)), 0.5, 5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_p1(lib, cfg).objective);
}
BENCHMARK(BM_SolveP1)->Arg(20)->Arg(100)->Arg(1000);

void BM_SimulateCoverageTrials(benchmark::State& state) {
  auto cfg = NetworkConfig::defaults();
  cfg.sigma = static_cast<double>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_coverage(1.0, cfg, 256, 0.0, seed++).mean);
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_SimulateCoverageTrials)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
