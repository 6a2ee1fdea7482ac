#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eegx/recording.hpp"

namespace eegx {

enum class Band { delta, theta, alpha, beta, gamma };

inline constexpr std::array<Band, 5> kAllBands{Band::delta, Band::theta, Band::alpha, Band::beta,
                                               Band::gamma};

std::string_view band_name(Band band);
Band band_from_name(std::string_view name);

struct BandDefinition {
  Band id;
  double low_hz;
  double high_hz;

  bool operator==(const BandDefinition&) const = default;
};

/// Canonical EEG band edges in Hz.
BandDefinition standard_band(Band band);
std::array<BandDefinition, 5> standard_bands();

/// Highest usable band edge at sampling rate fs: 0.99 of Nyquist.
double band_edge_cap(double fs);

/// One biquad: y = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

struct FilterSpec {
  BandDefinition band;   ///< the band as requested
  double design_high_hz; ///< upper edge actually used (after the Nyquist cap)
  int order;             ///< band-pass order; sections.size() == order / 2
  double fs;
  std::vector<Biquad> sections;

  bool capped() const noexcept { return design_high_hz < band.high_hz; }
};

/// Removes the least-squares line. Throws SizeError for fewer than two samples.
std::vector<double> detrend(std::span<const double> signal);

/// Butterworth band-pass as cascaded second-order sections with bilinear prewarping,
/// so the single-pass response is -3 dB at both (capped) edges and unity at the
/// digital centre frequency. `order` must be even and in [2, 8].
FilterSpec design_bandpass(const BandDefinition& band, double fs, int order = 4);

/// Frequency response magnitude of a single forward pass at `freq_hz`.
double magnitude_response(const FilterSpec& spec, double freq_hz);

/// Single forward pass with zero initial state (impulse/step responses).
std::vector<double> filter_forward(std::span<const double> signal, const FilterSpec& spec);

/// Padding length used by apply_zero_phase: 3 * (order + 1).
std::size_t zero_phase_padding(const FilterSpec& spec);

/// Forward-backward filtering with even reflection padding and steady-state
/// initial conditions. Output length equals input length.
std::vector<double> apply_zero_phase(std::span<const double> signal, const FilterSpec& spec);

struct BandDecomposition {
  std::vector<std::string> channels;
  double fs = 0.0;
  std::map<Band, Matrix> bands;
  std::map<Band, FilterSpec> filters;
  std::vector<Band> omitted;  ///< bands infeasible at this fs
  std::vector<Band> capped;   ///< bands whose upper edge was capped below Nyquist

  /// The band's matrix wrapped as a recording sharing source metadata.
  EegRecording band_recording(Band band, const EegRecording& source) const;
};

/// Detrends each channel, then zero-phase filters it through every feasible band.
BandDecomposition decompose_bands(const EegRecording& rec, int order = 4);

/// One band only: detrend and zero-phase filter every channel. Metadata is kept.
EegRecording filter_band(const EegRecording& rec, Band band, int order = 4);

}  // namespace eegx
