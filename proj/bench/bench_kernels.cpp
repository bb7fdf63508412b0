#include <benchmark/benchmark.h>

#include <numbers>

#include "scatlimit/estimation_ingest.hpp"
#include "scatlimit/mc_validation.hpp"
#include "scatlimit/wick_diagrams.hpp"

using namespace scatlimit;

namespace {

Campaign bench_campaign() {
  Campaign c;
  c.subordinator = Subordinator::hermite_sum({0, 1, 1});
  c.j1_grid = {4, 5, 6};
  c.j2_grid = c.j1_grid;
  c.replicates = 16;
  c.path_length = std::size_t{1} << 14;
  return c;
}

void replicates(benchmark::State& state, bool parallel) {
  const auto c = bench_campaign();
  auto body = [&](std::size_t, const SampledPath& g) {
    std::vector<double> out;
    for (double j : c.j1_grid) {
      auto d = diff_paths(c.subordinator, g, c.wavelet, j, j).first;
      out.push_back(d.values[d.size() / 2]);
    }
    return out;
  };
  for (auto _ : state) benchmark::DoNotOptimize(run_replicates(c, body, parallel));
}

void wick(benchmark::State& state, bool parallel) {
  const std::vector<int> order{3, 3, 3, 3};
  CorrelationMatrix cov{4, std::vector<double>(16, 0.3)};
  for (int i = 0; i < 4; ++i) cov.values[i * 5] = 1.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(parallel ? hermite_moment_parallel(order, cov) : hermite_moment(order, cov));
}

void periodogram(benchmark::State& state, int workers) {
  SignalDataset d;
  stats::CounterRng rng(3, 0);
  for (int s = 0; s < 32; ++s) {
    std::vector<double> v(8192);
    for (double& x : v) x = rng.normal();
    d.segments.push_back(std::move(v));
  }
  for (auto _ : state) benchmark::DoNotOptimize(averaged_periodogram(d, workers));
}

}  // namespace

BENCHMARK_CAPTURE(replicates, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(replicates, openmp, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(wick, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(wick, openmp, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(periodogram, serial, 1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(periodogram, openmp, 0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
