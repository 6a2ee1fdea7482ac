#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "eegx/recording.hpp"

namespace eegx {

/// Inverse-CDF GPD draws: sigma (U^-xi - 1) / xi, or -sigma log U at xi = 0.
std::vector<double> gen_gpd(std::size_t n, double sigma, double xi, std::uint64_t seed);

struct UniformPairs {
  std::vector<double> x;
  std::vector<double> y;
};

/// Bivariate normal with correlation rho, margins mapped through the normal CDF.
UniformPairs gen_gaussian_copula_pair(std::size_t n, double rho, std::uint64_t seed);
UniformPairs gen_independent_pair(std::size_t n, std::uint64_t seed);
UniformPairs gen_comonotone_pair(std::size_t n, std::uint64_t seed);

/// Bivariate normal draws (not mapped to uniforms).
UniformPairs gen_gaussian_pair(std::size_t n, double rho, std::uint64_t seed);

inline constexpr double kArCoeff1 = 1.3;
inline constexpr double kArCoeff2 = -0.4;

struct SyntheticEegOptions {
  double fs = 100.0;
  double pre_common_loading = 0.3;  ///< weak shared Gaussian AR component before onset
  double reference_loading = 4.0;   ///< heavy-tailed factor loading on channel 0
  double min_loading = 2.0;         ///< loading on the last channel
  int t_dof = 3;  ///< integer degrees of freedom, at least 3
};

/// Seizure-like recording. Every channel carries AR(2) Gaussian noise plus a weak
/// shared AR(2) component; after onset a shared Student-t factor is added with the
/// largest loading on channel 0. Channel i uses sub-seed derive_seed(seed, i + 1);
/// the shared components use streams 0 and channels + 1.
EegRecording gen_synthetic_eeg(std::size_t channels, std::size_t T, double onset_fraction,
                               std::uint64_t seed, const SyntheticEegOptions& options = {});

/// Standard 10-20 labels for the first channels, then "C<k>".
std::vector<std::string> montage_labels(std::size_t channels);

}  // namespace eegx
