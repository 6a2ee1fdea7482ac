#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "eegx/error.hpp"
#include "eegx/preprocess.hpp"
#include "eegx/rng.hpp"

namespace eegx {
namespace {

std::vector<double> tone(double freq, double fs, std::size_t n, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs);
  return x;
}

// Amplitude of the freq component on the middle half, by least-squares projection on sin/cos.
double interior_amplitude(const std::vector<double>& y, double freq, double fs) {
  const std::size_t n = y.size();
  double ss = 0, sc = 0, cc = 0, ys = 0, yc = 0;
  for (std::size_t i = n / 4; i < 3 * n / 4; ++i) {
    const double w = 2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs;
    const double s = std::sin(w), c = std::cos(w);
    ss += s * s; sc += s * c; cc += c * c; ys += y[i] * s; yc += y[i] * c;
  }
  const double det = ss * cc - sc * sc;
  const double a = (ys * cc - yc * sc) / det;
  const double b = (yc * ss - ys * sc) / det;
  return std::hypot(a, b);
}

double interior_max_abs(const std::vector<double>& y) {
  double m = 0.0;
  for (std::size_t i = y.size() / 4; i < 3 * y.size() / 4; ++i) m = std::max(m, std::abs(y[i]));
  return m;
}

TEST(Bands, StandardTable) {
  const auto b = standard_bands();
  EXPECT_EQ(b[0], (BandDefinition{Band::delta, 0.5, 4.0}));
  EXPECT_EQ(b[1], (BandDefinition{Band::theta, 4.0, 8.0}));
  EXPECT_EQ(b[2], (BandDefinition{Band::alpha, 8.0, 12.0}));
  EXPECT_EQ(b[3], (BandDefinition{Band::beta, 13.0, 30.0}));
  EXPECT_EQ(b[4], (BandDefinition{Band::gamma, 30.0, 100.0}));
  EXPECT_EQ(band_from_name("gamma"), Band::gamma);
  EXPECT_THROW(band_from_name("mu"), UsageError);
}

TEST(Detrend, ConstantAndLineVanish) {
  for (double v : detrend(std::vector<double>(17, 3.25))) EXPECT_NEAR(v, 0.0, 1e-12);
  std::vector<double> line(50);
  for (std::size_t i = 0; i < line.size(); ++i) line[i] = -2.0 + 0.75 * static_cast<double>(i);
  for (double v : detrend(line)) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Detrend, MatchesNormalEquations) {
  // Fit a + b t on t = 0, 1, 2 from the uncentred normal equations.
  const std::vector<double> y{1.0, 2.0, 4.0};
  const double n = 3, st = 3, stt = 5, sy = 7, sty = 0 * 1 + 1 * 2 + 2 * 4;
  const double b = (n * sty - st * sy) / (n * stt - st * st);
  const double a = (sy - b * st) / n;
  EXPECT_NEAR(a, 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(b, 1.5, 1e-15);
  const auto r = detrend(y);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_NEAR(r[t], y[t] - (a + b * static_cast<double>(t)), 1e-12);
  EXPECT_NEAR(r[0], 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(r[1], -1.0 / 3.0, 1e-12);
}

TEST(Detrend, ResidualMeanAndSlopeZero) {
  Rng rng(5);
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 40.0 + 0.3 * static_cast<double>(i) + rng.normal();
  const auto r = detrend(x);
  double m = 0, slope = 0, stt = 0;
  for (double v : r) m += v;
  m /= 1000.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    slope += (static_cast<double>(i) - 499.5) * r[i];
    stt += (static_cast<double>(i) - 499.5) * (static_cast<double>(i) - 499.5);
  }
  EXPECT_NEAR(m, 0.0, 1e-9);
  EXPECT_NEAR(slope / stt, 0.0, 1e-9);
  EXPECT_THROW(detrend(std::vector<double>{1.0}), SizeError);
}

TEST(Design, AlphaBandSectionsAreStable) {
  const auto spec = design_bandpass(standard_band(Band::alpha), 100.0, 4);
  ASSERT_EQ(spec.sections.size(), 2u);
  EXPECT_FALSE(spec.capped());
  for (const auto& s : spec.sections) {
    EXPECT_EQ(s.a[0], 1.0);
    // roots of z^2 + a1 z + a2
    const std::complex<double> disc = std::sqrt(std::complex<double>(s.a[1] * s.a[1] - 4.0 * s.a[2]));
    EXPECT_LT(std::abs((-s.a[1] + disc) / 2.0), 1.0);
    EXPECT_LT(std::abs((-s.a[1] - disc) / 2.0), 1.0);
  }
}

TEST(Design, EdgesAtMinusThreeDecibelsAndUnityCentre) {
  for (int order : {2, 4, 6, 8}) {
    for (Band b : kAllBands) {
      const auto spec = design_bandpass(standard_band(b), 100.0, order);
      EXPECT_NEAR(magnitude_response(spec, spec.band.low_hz), std::numbers::sqrt2 / 2, 1e-6);
      EXPECT_NEAR(magnitude_response(spec, spec.design_high_hz), std::numbers::sqrt2 / 2, 1e-6);
      // digital image of the prewarped geometric centre
      const double k = 200.0;
      const double w0 = std::sqrt(k * std::tan(std::numbers::pi * spec.band.low_hz / 100.0) * k *
                                  std::tan(std::numbers::pi * spec.design_high_hz / 100.0));
      const double fc = 100.0 / std::numbers::pi * std::atan(w0 / k);
      EXPECT_NEAR(magnitude_response(spec, fc), 1.0, 1e-9);
    }
  }
}

TEST(Design, GeometricMeanGainForwardBackward) {
  const auto spec = design_bandpass(standard_band(Band::alpha), 100.0, 4);
  const double g = std::pow(magnitude_response(spec, std::sqrt(8.0 * 12.0)), 2);
  const double db = 20.0 * std::log10(g);
  EXPECT_LE(db, 0.01);
  EXPECT_GE(db, -0.01);
}

TEST(Design, GammaCappedAtFs100) {
  const auto spec = design_bandpass(standard_band(Band::gamma), 100.0, 4);
  EXPECT_TRUE(spec.capped());
  EXPECT_DOUBLE_EQ(spec.design_high_hz, 49.5);
}

TEST(Design, InfeasibleRequestsThrow) {
  EXPECT_THROW(design_bandpass(standard_band(Band::delta), 0.8, 4), DesignError);
  EXPECT_THROW(design_bandpass(standard_band(Band::alpha), 100.0, 3), DesignError);
  EXPECT_THROW(design_bandpass(standard_band(Band::alpha), 100.0, 10), DesignError);
  EXPECT_THROW(design_bandpass({Band::alpha, 12.0, 8.0}, 100.0, 4), DesignError);
  // low edge below Nyquist but above the 0.99 cap
  EXPECT_THROW(design_bandpass({Band::gamma, 49.8, 60.0}, 100.0, 4), DesignError);
}

TEST(ZeroPhase, ZeroAndDcInputs) {
  for (Band b : kAllBands) {
    const auto spec = design_bandpass(standard_band(b), 100.0, 4);
    for (double v : apply_zero_phase(std::vector<double>(500, 0.0), spec)) EXPECT_EQ(v, 0.0);
    const double c = 37.5;
    const auto y = apply_zero_phase(std::vector<double>(2000, c), spec);
    ASSERT_EQ(y.size(), 2000u);
    EXPECT_LE(interior_max_abs(y), 1e-6 * c) << band_name(b);
  }
}

TEST(ZeroPhase, AlphaPassesTenHertz) {
  const auto spec = design_bandpass(standard_band(Band::alpha), 100.0, 4);
  const auto y = apply_zero_phase(tone(10.0, 100.0, 2000), spec);
  const double amp = interior_amplitude(y, 10.0, 100.0);
  EXPECT_GE(amp, 0.95);
  EXPECT_LE(amp, 1.0);
}

TEST(ZeroPhase, StopbandRejectsTwiceUpperEdge) {
  for (Band b : kAllBands) {
    const auto spec = design_bandpass(standard_band(b), 100.0, 4);
    const double f = 2.0 * spec.design_high_hz;
    if (f >= 50.0) continue;
    const auto y = apply_zero_phase(tone(f, 100.0, 4000), spec);
    EXPECT_LE(interior_amplitude(y, f, 100.0), 0.05) << band_name(b);
  }
}

TEST(ZeroPhase, Linear) {
  Rng rng(17);
  std::vector<double> x(1500), y(1500), mix(1500);
  const double a = 2.5, c = -0.75;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = 3.0 * rng.normal();
    mix[i] = a * x[i] + c * y[i];
  }
  for (Band b : kAllBands) {
    const auto spec = design_bandpass(standard_band(b), 100.0, 4);
    const auto fx = apply_zero_phase(x, spec), fy = apply_zero_phase(y, spec), fm = apply_zero_phase(mix, spec);
    double scale = 0.0;
    for (double v : fm) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(fm[i], a * fx[i] + c * fy[i], 1e-9 * scale);
  }
}

TEST(ZeroPhase, NoLagOnBandLimitedInput) {
  // Band-limited input: white noise through the same design, single pass.
  Rng rng(3);
  std::vector<double> w(4000);
  for (double& v : w) v = rng.normal();
  for (Band b : {Band::theta, Band::alpha, Band::beta}) {
    const auto spec = design_bandpass(standard_band(b), 100.0, 4);
    const auto x = apply_zero_phase(w, spec);
    const auto y = apply_zero_phase(x, spec);
    int best_lag = 1000;
    double best = -1e300;
    for (int lag = -40; lag <= 40; ++lag) {
      double s = 0.0;
      for (int i = 500; i < 3500; ++i) s += x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i + lag)];
      if (s > best) { best = s; best_lag = lag; }
    }
    EXPECT_EQ(best_lag, 0) << band_name(b);
  }
}

TEST(ZeroPhase, ImpulseResponseDecays) {
  for (Band b : kAllBands) {
    const auto spec = design_bandpass(standard_band(b), 100.0, 4);
    std::vector<double> impulse(3000, 0.0);
    impulse[0] = 1.0;
    const auto h = filter_forward(impulse, spec);
    double tail = 0.0;
    for (std::size_t i = 1000; i < h.size(); ++i) tail = std::max(tail, std::abs(h[i]));
    EXPECT_LT(tail, 1e-8) << band_name(b);
  }
}

TEST(ZeroPhase, ShortSignalRejected) {
  const auto spec = design_bandpass(standard_band(Band::alpha), 100.0, 4);
  EXPECT_EQ(zero_phase_padding(spec), 15u);
  EXPECT_THROW(apply_zero_phase(std::vector<double>(14, 1.0), spec), SizeError);
  EXPECT_EQ(apply_zero_phase(std::vector<double>(15, 1.0), spec).size(), 15u);
}

EegRecording noise_recording(double fs, std::size_t T, std::size_t C) {
  Rng rng(99);
  EegRecording rec;
  for (std::size_t c = 0; c < C; ++c) rec.channels.push_back("c" + std::to_string(c));
  rec.fs = fs;
  rec.data = Matrix(T, C);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t c = 0; c < C; ++c) rec.data(t, c) = rng.normal() + 0.01 * static_cast<double>(t);
  return rec;
}

TEST(Decompose, AllBandsAtFs100WithGammaCapped) {
  const auto d = decompose_bands(noise_recording(100.0, 3000, 3), 4);
  EXPECT_EQ(d.bands.size(), 5u);
  EXPECT_TRUE(d.omitted.empty());
  ASSERT_EQ(d.capped.size(), 1u);
  EXPECT_EQ(d.capped[0], Band::gamma);
  EXPECT_DOUBLE_EQ(d.filters.at(Band::gamma).design_high_hz, 49.5);
  for (const auto& [band, m] : d.bands) {
    EXPECT_EQ(m.rows(), 3000u);
    EXPECT_EQ(m.cols(), 3u);
    for (double v : m.values()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(Decompose, NominalEdgesAtFs1000) {
  const auto d = decompose_bands(noise_recording(1000.0, 5000, 2), 4);
  EXPECT_EQ(d.bands.size(), 5u);
  EXPECT_TRUE(d.capped.empty());
  EXPECT_DOUBLE_EQ(d.filters.at(Band::gamma).design_high_hz, 100.0);
}

TEST(Decompose, ZeroRecordingGivesZeroBands) {
  EegRecording rec;
  rec.channels = {"A", "B"};
  rec.fs = 100.0;
  rec.data = Matrix(400, 2);
  const auto d = decompose_bands(rec, 4);
  EXPECT_EQ(d.bands.size(), 5u);
  for (const auto& [band, m] : d.bands)
    for (double v : m.values()) EXPECT_EQ(v, 0.0);
}

TEST(Decompose, InfeasibleBandsOmitted) {
  const auto d = decompose_bands(noise_recording(10.0, 2000, 1), 4);
  // Nyquist 5 Hz, cap 4.95: delta (0.5-4) and theta (4-4.95) remain
  EXPECT_EQ(d.bands.size(), 2u);
  EXPECT_EQ(d.omitted.size(), 3u);
  EXPECT_THROW(decompose_bands(noise_recording(0.8, 2000, 1), 4), DesignError);
}

}  // namespace
}  // namespace eegx
