#include <benchmark/benchmark.h>

#include "eegx/gpd.hpp"
#include "eegx/simulate.hpp"

namespace {

void BM_FitGpd(benchmark::State& state) {
  const auto y = eegx::gen_gpd(static_cast<std::size_t>(state.range(0)), 2.0, 0.2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(eegx::fit_gpd(y));
}
BENCHMARK(BM_FitGpd)->Arg(500)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ChannelTail(benchmark::State& state) {
  const auto rec = eegx::gen_synthetic_eeg(2, 50000, 0.7, 2);
  const auto x = rec.data.column(0);
  for (auto _ : state) benchmark::DoNotOptimize(eegx::fit_channel_tail(x, 0.95, 50));
}
BENCHMARK(BM_ChannelTail)->Unit(benchmark::kMillisecond);

void BM_ParameterStability(benchmark::State& state) {
  const auto y = eegx::gen_gpd(20000, 1.0, 0.1, 3);
  const auto grid = eegx::quantile_grid(y, 0.8, 0.995, 20);
  for (auto _ : state) benchmark::DoNotOptimize(eegx::parameter_stability(y, grid));
}
BENCHMARK(BM_ParameterStability)->Unit(benchmark::kMillisecond);

}  // namespace
