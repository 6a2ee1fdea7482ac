#include <benchmark/benchmark.h>

#include "eegx/conditional.hpp"
#include "eegx/extremal.hpp"
#include "eegx/simulate.hpp"

namespace {

void BM_ChiMatrix(benchmark::State& state) {
  const auto rec = eegx::gen_synthetic_eeg(static_cast<std::size_t>(state.range(0)), 15000, 0.5, 1);
  eegx::ChiOptions opt;
  opt.n_boot = 200;
  for (auto _ : state) benchmark::DoNotOptimize(eegx::chi_matrix(rec, 0.95, opt));
}
BENCHMARK(BM_ChiMatrix)->Arg(4)->Arg(19)->Unit(benchmark::kMillisecond);

void BM_FitHt(benchmark::State& state) {
  const auto p = eegx::gen_gaussian_copula_pair(static_cast<std::size_t>(state.range(0)), 0.6, 2);
  std::vector<double> yc(p.x.size()), yd(p.y.size());
  for (std::size_t i = 0; i < yc.size(); ++i) {
    yc[i] = eegx::laplace_quantile(p.x[i]);
    yd[i] = eegx::laplace_quantile(p.y[i]);
  }
  for (auto _ : state) benchmark::DoNotOptimize(eegx::fit_ht(yc, yd, 0.95));
}
BENCHMARK(BM_FitHt)->Arg(15000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_SimulateConditional(benchmark::State& state) {
  const auto p = eegx::gen_gaussian_copula_pair(50000, 0.6, 3);
  std::vector<double> yc(p.x.size()), yd(p.y.size());
  for (std::size_t i = 0; i < yc.size(); ++i) {
    yc[i] = eegx::laplace_quantile(p.x[i]);
    yd[i] = eegx::laplace_quantile(p.y[i]);
  }
  eegx::HtFit f = eegx::fit_ht(yc, yd, 0.95);
  f.cond_channel = "x";
  for (auto _ : state) benchmark::DoNotOptimize(eegx::simulate_conditional(std::span(&f, 1), 0.99, 10000, 4));
}
BENCHMARK(BM_SimulateConditional)->Unit(benchmark::kMillisecond);

}  // namespace
