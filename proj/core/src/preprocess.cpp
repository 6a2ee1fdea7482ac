#include "eegx/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "eegx/error.hpp"
#include "eegx/parallel.hpp"

namespace eegx {

using cplx = std::complex<double>;

std::string_view band_name(Band band) {
  switch (band) {
    case Band::delta: return "delta";
    case Band::theta: return "theta";
    case Band::alpha: return "alpha";
    case Band::beta: return "beta";
    case Band::gamma: return "gamma";
  }
  return "unknown";
}

Band band_from_name(std::string_view name) {
  for (Band b : kAllBands)
    if (band_name(b) == name) return b;
  throw UsageError("unknown band '" + std::string(name) + "'; expected delta, theta, alpha, beta or gamma");
}

BandDefinition standard_band(Band band) {
  switch (band) {
    case Band::delta: return {Band::delta, 0.5, 4.0};
    case Band::theta: return {Band::theta, 4.0, 8.0};
    case Band::alpha: return {Band::alpha, 8.0, 12.0};
    case Band::beta: return {Band::beta, 13.0, 30.0};
    case Band::gamma: return {Band::gamma, 30.0, 100.0};
  }
  throw UsageError("unknown band");
}

std::array<BandDefinition, 5> standard_bands() {
  std::array<BandDefinition, 5> out{};
  for (std::size_t i = 0; i < kAllBands.size(); ++i) out[i] = standard_band(kAllBands[i]);
  return out;
}

double band_edge_cap(double fs) { return 0.99 * fs / 2.0; }

std::vector<double> detrend(std::span<const double> signal) {
  const std::size_t n = signal.size();
  if (n < 2) throw SizeError("detrend needs at least 2 samples");
  // Centre t at its mean so the normal equations decouple.
  const double tbar = 0.5 * static_cast<double>(n - 1);
  double ybar = 0.0;
  for (double v : signal) ybar += v;
  ybar /= static_cast<double>(n);
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) - tbar;
    stt += t * t;
    sty += t * (signal[i] - ybar);
  }
  const double slope = sty / stt;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = signal[i] - ybar - slope * (static_cast<double>(i) - tbar);
  return out;
}

namespace {

cplx section_response(const Biquad& s, double omega) {
  const cplx z1 = std::polar(1.0, -omega);
  const cplx z2 = z1 * z1;
  return (s.b[0] + s.b[1] * z1 + s.b[2] * z2) / (1.0 + s.a[1] * z1 + s.a[2] * z2);
}

}  // namespace

FilterSpec design_bandpass(const BandDefinition& band, double fs, int order) {
  if (!(fs > 0.0)) throw DesignError("sampling rate must be positive");
  if (order < 2 || order > 8 || order % 2 != 0)
    throw DesignError("band-pass order must be even and in [2, 8], got " + std::to_string(order));
  if (!(band.low_hz > 0.0) || !(band.low_hz < band.high_hz))
    throw DesignError("band edges must satisfy 0 < low < high");
  const double nyquist = fs / 2.0;
  if (band.low_hz >= nyquist)
    throw DesignError(std::string(band_name(band.id)) + " band lies above the Nyquist frequency");
  const double high = std::min(band.high_hz, band_edge_cap(fs));
  if (band.low_hz >= high)
    throw DesignError(std::string(band_name(band.id)) + " band is empty after capping its upper edge at " +
                      std::to_string(high) + " Hz");

  // Prewarped analog edges.
  const double k = 2.0 * fs;
  const double wl = k * std::tan(std::numbers::pi * band.low_hz / fs);
  const double wh = k * std::tan(std::numbers::pi * high / fs);
  const double w0 = std::sqrt(wl * wh);
  const double bw = wh - wl;

  const int n_proto = order / 2;
  std::vector<cplx> poles;
  for (int i = 0; i < n_proto; ++i) {
    const cplx p = std::polar(1.0, std::numbers::pi * (2.0 * i + n_proto + 1.0) / (2.0 * n_proto));
    const cplx half = p * bw / 2.0;
    const cplx root = std::sqrt(half * half - w0 * w0);
    for (cplx s : {half + root, half - root}) poles.push_back((k + s) / (k - s));
  }

  // Group into conjugate pairs; real poles pair with each other.
  constexpr double kImagTol = 1e-12;
  std::vector<cplx> upper, real;
  for (const cplx& z : poles) {
    if (z.imag() > kImagTol) upper.push_back(z);
    else if (std::abs(z.imag()) <= kImagTol) real.push_back({z.real(), 0.0});
  }
  std::sort(real.begin(), real.end(), [](cplx a, cplx b) { return a.real() < b.real(); });

  FilterSpec spec{band, high, order, fs, {}};
  const double center = 2.0 * std::atan(w0 / k);
  auto add_section = [&](double a1, double a2) {
    Biquad s;
    s.b = {1.0, 0.0, -1.0};
    s.a = {1.0, a1, a2};
    const double g = 1.0 / std::abs(section_response(s, center));
    s.b = {g, 0.0, -g};
    spec.sections.push_back(s);
  };
  for (const cplx& z : upper) add_section(-2.0 * z.real(), std::norm(z));
  for (std::size_t i = 0; i + 1 < real.size(); i += 2)
    add_section(-(real[i].real() + real[i + 1].real()), real[i].real() * real[i + 1].real());

  if (spec.sections.size() != static_cast<std::size_t>(n_proto))
    throw DesignError("pole pairing failed");
  return spec;
}

double magnitude_response(const FilterSpec& spec, double freq_hz) {
  const double omega = 2.0 * std::numbers::pi * freq_hz / spec.fs;
  cplx h = 1.0;
  for (const auto& s : spec.sections) h *= section_response(s, omega);
  return std::abs(h);
}

namespace {

// Transposed direct form II, one section at a time, in place.
void run_section(std::vector<double>& x, const Biquad& s, double z1, double z2) {
  for (double& v : x) {
    const double in = v;
    const double out = s.b[0] * in + z1;
    z1 = s.b[1] * in - s.a[1] * out + z2;
    z2 = s.b[2] * in - s.a[2] * out;
    v = out;
  }
}

// Cascade with states set to the steady state for a constant input `level`.
void run_cascade_steady(std::vector<double>& x, const FilterSpec& spec) {
  double level = x.empty() ? 0.0 : x.front();
  for (const auto& s : spec.sections) {
    const double dc = (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[1] + s.a[2]);
    const double z2 = (s.b[2] - s.a[2] * dc) * level;
    const double z1 = (s.b[1] - s.a[1] * dc) * level + z2;
    run_section(x, s, z1, z2);
    level *= dc;
  }
}

}  // namespace

std::vector<double> filter_forward(std::span<const double> signal, const FilterSpec& spec) {
  std::vector<double> y(signal.begin(), signal.end());
  for (const auto& s : spec.sections) run_section(y, s, 0.0, 0.0);
  return y;
}

std::size_t zero_phase_padding(const FilterSpec& spec) {
  return 3 * static_cast<std::size_t>(spec.order + 1);
}

std::vector<double> apply_zero_phase(std::span<const double> signal, const FilterSpec& spec) {
  const std::size_t n = signal.size();
  const std::size_t pad = zero_phase_padding(spec);
  if (n < pad)
    throw SizeError("signal of " + std::to_string(n) + " samples is shorter than the " +
                    std::to_string(pad) + "-sample padding");

  // Even (half-sample) reflection at both ends.
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i-- > 0;) ext.push_back(signal[i]);
  ext.insert(ext.end(), signal.begin(), signal.end());
  for (std::size_t i = 0; i < pad; ++i) ext.push_back(signal[n - 1 - i]);

  run_cascade_steady(ext, spec);
  std::reverse(ext.begin(), ext.end());
  run_cascade_steady(ext, spec);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

EegRecording BandDecomposition::band_recording(Band band, const EegRecording& source) const {
  const auto it = bands.find(band);
  if (it == bands.end()) throw LookupError("band " + std::string(band_name(band)) + " not in decomposition");
  EegRecording rec;
  rec.channels = channels;
  rec.fs = fs;
  rec.data = it->second;
  rec.onset_index = source.onset_index;
  return rec;
}

BandDecomposition decompose_bands(const EegRecording& rec, int order) {
  validate(rec);
  BandDecomposition out;
  out.channels = rec.channels;
  out.fs = rec.fs;

  std::vector<Band> feasible;
  for (Band b : kAllBands) {
    try {
      auto spec = design_bandpass(standard_band(b), rec.fs, order);
      if (spec.capped()) out.capped.push_back(b);
      out.filters.emplace(b, std::move(spec));
      feasible.push_back(b);
    } catch (const DesignError&) {
      out.omitted.push_back(b);
    }
  }
  if (feasible.empty()) throw DesignError("no EEG band is feasible at fs = " + std::to_string(rec.fs) + " Hz");

  const std::size_t C = rec.num_channels();
  std::vector<std::vector<double>> detrended(C);
  parallel_for(C, [&](std::size_t c) { detrended[c] = detrend(rec.data.column(c)); });

  for (Band b : feasible) out.bands.emplace(b, Matrix(rec.num_samples(), C));
  parallel_for(feasible.size() * C, [&](std::size_t job) {
    const Band b = feasible[job / C];
    const std::size_t c = job % C;
    const auto filtered = apply_zero_phase(detrended[c], out.filters.at(b));
    out.bands.at(b).set_column(c, filtered);
  });
  return out;
}

EegRecording filter_band(const EegRecording& rec, Band band, int order) {
  validate(rec);
  const FilterSpec spec = design_bandpass(standard_band(band), rec.fs, order);
  EegRecording out = rec;
  parallel_for(rec.num_channels(), [&](std::size_t c) {
    out.data.set_column(c, apply_zero_phase(detrend(rec.data.column(c)), spec));
  });
  return out;
}

}  // namespace eegx
