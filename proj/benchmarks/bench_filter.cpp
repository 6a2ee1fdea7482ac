#include <benchmark/benchmark.h>

#include "eegx/preprocess.hpp"
#include "eegx/simulate.hpp"
#include "eegx/spectral.hpp"

namespace {

void BM_ZeroPhaseAlpha(benchmark::State& state) {
  const auto rec = eegx::gen_synthetic_eeg(2, static_cast<std::size_t>(state.range(0)), 0.5, 1);
  const auto x = rec.data.column(0);
  const auto spec = eegx::design_bandpass(eegx::standard_band(eegx::Band::alpha), 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(eegx::apply_zero_phase(x, spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ZeroPhaseAlpha)->Arg(2000)->Arg(50000);

void BM_DecomposeBands(benchmark::State& state) {
  const auto rec = eegx::gen_synthetic_eeg(static_cast<std::size_t>(state.range(0)), 50000, 0.7, 1);
  for (auto _ : state) benchmark::DoNotOptimize(eegx::decompose_bands(rec));
}
BENCHMARK(BM_DecomposeBands)->Arg(4)->Arg(19)->Unit(benchmark::kMillisecond);

void BM_Welch(benchmark::State& state) {
  const auto rec = eegx::gen_synthetic_eeg(2, 50000, 0.5, 2);
  const auto x = rec.data.column(0);
  for (auto _ : state) benchmark::DoNotOptimize(eegx::welch(x, 100.0, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_Welch)->Arg(256)->Arg(1024);

void BM_Periodogram(benchmark::State& state) {
  const auto rec = eegx::gen_synthetic_eeg(2, static_cast<std::size_t>(state.range(0)), 0.5, 3);
  const auto x = rec.data.column(0);
  for (auto _ : state) benchmark::DoNotOptimize(eegx::periodogram(x, 100.0));
}
BENCHMARK(BM_Periodogram)->Arg(50000)->Arg(50021);

}  // namespace
