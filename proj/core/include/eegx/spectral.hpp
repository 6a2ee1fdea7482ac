#pragma once

#include <span>
#include <vector>

#include "eegx/preprocess.hpp"

namespace eegx {

enum class SpectrumMethod { periodogram, welch };

/// One-sided power spectral density on [0, fs/2]. The density is scaled so that
/// sum(power) * (fs / n) equals the variance (divisor n) of the centred input.
struct SpectrumEstimate {
  std::vector<double> freqs_hz;
  std::vector<double> power;
  SpectrumMethod method = SpectrumMethod::periodogram;
  double fs = 0.0;
  std::size_t segment_length = 0;  ///< transform length behind each ordinate
};

SpectrumEstimate periodogram(std::span<const double> signal, double fs);

/// Averaged Hann-tapered segment periodograms. A single segment spanning the whole
/// signal (seg_len == n, overlap 0) falls back to the untapered periodogram.
SpectrumEstimate welch(std::span<const double> signal, double fs, std::size_t seg_len,
                       double overlap = 0.5);

/// Share of power inside [low, min(high, fs/2)] relative to (0, fs/2], from the exact
/// integral of the piecewise-linear interpolant of the spectrum (DC bin excluded).
double band_power(const SpectrumEstimate& spec, const BandDefinition& band);

/// Same, for an arbitrary [low_hz, high_hz] range.
double band_power(const SpectrumEstimate& spec, double low_hz, double high_hz);

}  // namespace eegx
