#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "eegx/error.hpp"
#include "eegx/rng.hpp"
#include "eegx/spectral.hpp"
#include "eegx/stats.hpp"

namespace eegx {
namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = 5.0 + sd * rng.normal();
  return x;
}

std::vector<double> tone(double freq, double fs, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs);
  return x;
}

double spread(const std::vector<double>& p) {
  // std / mean over interior bins
  std::vector<double> v(p.begin() + 1, p.end() - 1);
  return std::sqrt(variance_n(v)) / mean(v);
}

TEST(Periodogram, ToneConcentratesInOneBin) {
  const auto s = periodogram(tone(10.0, 100.0, 1000), 100.0);
  ASSERT_EQ(s.freqs_hz.size(), 501u);
  const auto top = std::max_element(s.power.begin(), s.power.end()) - s.power.begin();
  EXPECT_DOUBLE_EQ(s.freqs_hz[static_cast<std::size_t>(top)], 10.0);
  const double total = std::accumulate(s.power.begin(), s.power.end(), 0.0);
  EXPECT_GE(s.power[static_cast<std::size_t>(top)] / total, 0.99);
}

TEST(Periodogram, ZeroSignal) {
  for (double v : periodogram(std::vector<double>(64, 0.0), 10.0).power) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(periodogram(std::vector<double>{1.0}, 10.0), SizeError);
}

TEST(Periodogram, Parseval) {
  for (std::size_t n : {1000u, 1001u, 4096u, 777u}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto x = noise(n, seed * 31 + n, 2.5);
      const auto s = periodogram(x, 256.0);
      double sum = 0.0;
      for (double v : s.power) {
        ASSERT_GE(v, 0.0);
        sum += v;
      }
      const double var = variance_n(x);
      EXPECT_NEAR(sum * 256.0 / static_cast<double>(n), var, 1e-8 * var);
    }
  }
}

TEST(Periodogram, FrequencyGridAscending) {
  const auto s = periodogram(noise(101, 4), 100.0);
  for (std::size_t k = 1; k < s.freqs_hz.size(); ++k) EXPECT_GT(s.freqs_hz[k], s.freqs_hz[k - 1]);
  EXPECT_LE(s.freqs_hz.back(), 50.0);
}

TEST(Welch, SingleFullSegmentEqualsPeriodogram) {
  const auto x = noise(512, 8);
  const auto w = welch(x, 100.0, 512, 0.0);
  const auto p = periodogram(x, 100.0);
  EXPECT_EQ(w.power, p.power);
  EXPECT_EQ(w.freqs_hz, p.freqs_hz);
}

TEST(Welch, AveragingReducesSpread) {
  const auto x = noise(8192, 12);
  const auto w = welch(x, 100.0, 1024, 0.5);
  const auto p = periodogram(x, 100.0);
  EXPECT_LT(spread(w.power), spread(p.power));
  // flat density around 2 * variance / fs
  EXPECT_NEAR(mean(w.power), 2.0 * variance_n(x) / 100.0, 0.1 * 2.0 / 100.0);
}

TEST(Welch, ZeroAndErrors) {
  for (double v : welch(std::vector<double>(256, 0.0), 100.0, 64, 0.5).power) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(welch(std::vector<double>(64, 0.0), 100.0, 65, 0.5), SizeError);
  EXPECT_THROW(welch(std::vector<double>(64, 0.0), 100.0, 32, 0.95), UsageError);
}

TEST(BandPower, ToneInsideAndOutside) {
  const auto s = periodogram(tone(10.0, 100.0, 1000), 100.0);
  EXPECT_GE(band_power(s, standard_band(Band::alpha)), 0.99);
  EXPECT_LE(band_power(s, standard_band(Band::beta)), 0.01);
}

TEST(BandPower, WhiteNoiseShareProportionalToWidth) {
  const auto s = welch(noise(50000, 21), 100.0, 1000, 0.5);
  EXPECT_NEAR(band_power(s, standard_band(Band::alpha)), 4.0 / 49.5, 0.02);
}

TEST(BandPower, TilingBandsSumToOne) {
  const auto s = periodogram(noise(2000, 5), 100.0);
  const double edges[] = {0.0, 0.5, 4.0, 8.0, 12.0, 13.0, 30.0, 50.0};
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < std::size(edges); ++i) total += band_power(s, std::max(edges[i], 1e-9), edges[i + 1]);
  EXPECT_NEAR(total, 1.0, 1e-6);

  double standard = 0.0;
  for (const auto& b : standard_bands()) standard += band_power(s, b);
  EXPECT_LE(standard, 1.0 + 1e-12);
}

TEST(BandPower, NoOverlapIsDomainError) {
  const auto s = periodogram(noise(200, 1), 20.0);
  EXPECT_THROW(band_power(s, standard_band(Band::beta)), DomainError);
  EXPECT_NO_THROW(band_power(s, standard_band(Band::alpha)));
}

}  // namespace
}  // namespace eegx
