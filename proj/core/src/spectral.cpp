#include "eegx/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include "eegx/error.hpp"

namespace eegx {

namespace {

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

/// |DFT(x)[k]|^2 for k = 0..n/2 with one plan reused across calls of the same length.
class PowerDft {
 public:
  explicit PowerDft(std::size_t n)
      : n_(n), in_(fftw_alloc_real(n), &fftw_free), out_(fftw_alloc_complex(n / 2 + 1), &fftw_free) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
  }
  ~PowerDft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  PowerDft(const PowerDft&) = delete;
  PowerDft& operator=(const PowerDft&) = delete;

  std::vector<double> operator()(std::span<const double> x) {
    std::copy(x.begin(), x.end(), in_.get());
    fftw_execute(plan_);
    std::vector<double> p(n_ / 2 + 1);
    const fftw_complex* out = out_.get();
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    return p;
  }

 private:
  std::size_t n_;
  std::unique_ptr<double, decltype(&fftw_free)> in_;
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> out_;
  fftw_plan plan_;
};

/// One-sided density from |DFT|^2 of an n-point segment whose window has energy `window_energy`.
void one_sided_density(std::vector<double>& p, std::size_t n, double fs, double window_energy) {
  const double scale = 1.0 / (fs * window_energy);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
    p[k] *= unpaired ? scale : 2.0 * scale;
  }
}

std::vector<double> frequency_grid(std::size_t n, double fs) {
  std::vector<double> f(n / 2 + 1);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = static_cast<double>(k) * fs / static_cast<double>(n);
  return f;
}

std::vector<double> centred(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v -= m;
  return out;
}

}  // namespace

SpectrumEstimate periodogram(std::span<const double> signal, double fs) {
  const std::size_t n = signal.size();
  if (n < 2) throw SizeError("periodogram needs at least 2 samples");
  if (!(fs > 0.0)) throw UsageError("sampling rate must be positive");
  auto p = PowerDft(n)(centred(signal));
  one_sided_density(p, n, fs, static_cast<double>(n));
  return {frequency_grid(n, fs), std::move(p), SpectrumMethod::periodogram, fs, n};
}

SpectrumEstimate welch(std::span<const double> signal, double fs, std::size_t seg_len, double overlap) {
  const std::size_t n = signal.size();
  if (seg_len < 2) throw SizeError("welch segment length must be at least 2");
  if (seg_len > n)
    throw SizeError("welch segment length " + std::to_string(seg_len) + " exceeds signal length " +
                    std::to_string(n));
  if (!(overlap >= 0.0 && overlap <= 0.9)) throw UsageError("welch overlap must be in [0, 0.9]");
  if (!(fs > 0.0)) throw UsageError("sampling rate must be positive");

  if (seg_len == n && overlap == 0.0) {
    auto single = periodogram(signal, fs);
    single.method = SpectrumMethod::welch;
    return single;
  }

  // Periodic Hann taper.
  std::vector<double> window(seg_len);
  double energy = 0.0;
  for (std::size_t i = 0; i < seg_len; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(seg_len));
    energy += window[i] * window[i];
  }

  const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                 std::floor(static_cast<double>(seg_len) * (1.0 - overlap))));
  std::vector<double> avg(seg_len / 2 + 1, 0.0);
  std::size_t segments = 0;
  PowerDft dft(seg_len);
  for (std::size_t start = 0; start + seg_len <= n; start += step) {
    auto seg = centred(signal.subspan(start, seg_len));
    for (std::size_t i = 0; i < seg_len; ++i) seg[i] *= window[i];
    auto p = dft(seg);
    one_sided_density(p, seg_len, fs, energy);
    for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += p[k];
    ++segments;
  }
  for (double& v : avg) v /= static_cast<double>(segments);
  return {frequency_grid(seg_len, fs), std::move(avg), SpectrumMethod::welch, fs, seg_len};
}

namespace {

// Exact integral of the piecewise-linear interpolant of (f, p) over [a, b].
double integrate_linear(const std::vector<double>& f, const std::vector<double>& p, double a, double b) {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < f.size(); ++k) {
    const double lo = std::max(a, f[k]);
    const double hi = std::min(b, f[k + 1]);
    if (hi <= lo) continue;
    const double slope = (p[k + 1] - p[k]) / (f[k + 1] - f[k]);
    const double plo = p[k] + slope * (lo - f[k]);
    const double phi = p[k] + slope * (hi - f[k]);
    total += 0.5 * (plo + phi) * (hi - lo);
  }
  return total;
}

}  // namespace

double band_power(const SpectrumEstimate& spec, double low_hz, double high_hz) {
  if (spec.freqs_hz.size() < 3) throw SizeError("spectrum too short for band power");
  const double nyquist = spec.fs / 2.0;
  // The analysed range starts at the first non-DC bin.
  const double first = spec.freqs_hz[1];
  const double last = spec.freqs_hz.back();
  if (!(low_hz < high_hz) || low_hz >= nyquist || high_hz <= 0.0)
    throw DomainError("band [" + std::to_string(low_hz) + ", " + std::to_string(high_hz) +
                      "] Hz does not overlap (0, " + std::to_string(nyquist) + "] Hz");
  const double total = integrate_linear(spec.freqs_hz, spec.power, first, last);
  if (total <= 0.0) return 0.0;
  const double a = std::max(low_hz, first);
  const double b = std::min(high_hz, last);
  return std::clamp(integrate_linear(spec.freqs_hz, spec.power, a, b) / total, 0.0, 1.0);
}

double band_power(const SpectrumEstimate& spec, const BandDefinition& band) {
  return band_power(spec, band.low_hz, band.high_hz);
}

}  // namespace eegx
