#include "eegx/simulate.hpp"

#include <cmath>

#include "eegx/error.hpp"
#include "eegx/rng.hpp"
#include "eegx/stats.hpp"

namespace eegx {

std::vector<double> gen_gpd(std::size_t n, double sigma, double xi, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw UsageError("gen_gpd: sigma must be positive");
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& y : out) {
    const double u = rng.uniform();
    y = xi == 0.0 ? -sigma * std::log(u) : sigma * (std::pow(u, -xi) - 1.0) / xi;
  }
  return out;
}

UniformPairs gen_gaussian_pair(std::size_t n, double rho, std::uint64_t seed) {
  if (!(rho > -1.0 && rho < 1.0)) throw UsageError("correlation must be in (-1, 1)");
  Rng rng(seed);
  const double c = std::sqrt(1.0 - rho * rho);
  UniformPairs out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    out.x[i] = z1;
    out.y[i] = rho * z1 + c * z2;
  }
  return out;
}

UniformPairs gen_gaussian_copula_pair(std::size_t n, double rho, std::uint64_t seed) {
  UniformPairs out = gen_gaussian_pair(n, rho, seed);
  for (std::size_t i = 0; i < n; ++i) {
    out.x[i] = normal_cdf(out.x[i]);
    out.y[i] = normal_cdf(out.y[i]);
  }
  return out;
}

UniformPairs gen_independent_pair(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  UniformPairs out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.x[i] = rng.uniform();
    out.y[i] = rng.uniform();
  }
  return out;
}

UniformPairs gen_comonotone_pair(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  UniformPairs out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) out.x[i] = out.y[i] = rng.uniform();
  return out;
}

std::vector<std::string> montage_labels(std::size_t channels) {
  static const char* const kLabels[] = {"T3", "Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "T4", "C3",
                                        "Cz", "C4",  "T5",  "P3", "Pz", "P4", "T6", "O1", "O2"};
  constexpr std::size_t kCount = sizeof(kLabels) / sizeof(kLabels[0]);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < channels; ++i)
    out.push_back(i < kCount ? kLabels[i] : "C" + std::to_string(i + 1));
  return out;
}

namespace {

std::vector<double> ar2_series(std::size_t T, std::uint64_t seed) {
  constexpr std::size_t kBurnIn = 500;
  Rng rng(seed);
  std::vector<double> out(T);
  double x1 = 0.0, x2 = 0.0;
  for (std::size_t t = 0; t < T + kBurnIn; ++t) {
    const double x = kArCoeff1 * x1 + kArCoeff2 * x2 + rng.normal();
    x2 = x1;
    x1 = x;
    if (t >= kBurnIn) out[t - kBurnIn] = x;
  }
  return out;
}

}  // namespace

EegRecording gen_synthetic_eeg(std::size_t channels, std::size_t T, double onset_fraction, std::uint64_t seed,
                               const SyntheticEegOptions& options) {
  if (channels < 2) throw UsageError("synthetic EEG needs at least 2 channels");
  if (T < 1000) throw UsageError("synthetic EEG needs at least 1000 samples");
  if (!(onset_fraction > 0.0 && onset_fraction < 1.0)) throw UsageError("onset fraction must be in (0, 1)");
  if (options.t_dof < 3) throw UsageError("Student-t degrees of freedom must be at least 3");
  const auto onset = static_cast<std::size_t>(std::llround(onset_fraction * static_cast<double>(T)));
  if (onset < 1 || onset > T - 1) throw UsageError("onset fraction leaves an empty epoch");

  EegRecording rec;
  rec.channels = montage_labels(channels);
  rec.fs = options.fs;
  rec.onset_index = onset;
  rec.data = Matrix(T, channels);

  const auto shared = ar2_series(T, derive_seed(seed, 0));
  std::vector<double> factor(T, 0.0);
  {
    Rng rng(derive_seed(seed, channels + 1));
    // Student-t as Z / sqrt(V / dof), V a sum of dof squared normals.
    const int dof = options.t_dof;
    for (std::size_t t = onset; t < T; ++t) {
      const double z = rng.normal();
      double v = 0.0;
      for (int k = 0; k < dof; ++k) {
        const double g = rng.normal();
        v += g * g;
      }
      factor[t] = z / std::sqrt(v / dof);
    }
  }

  for (std::size_t c = 0; c < channels; ++c) {
    const auto own = ar2_series(T, derive_seed(seed, c + 1));
    const double loading = options.reference_loading - (options.reference_loading - options.min_loading) *
                                                           static_cast<double>(c) /
                                                           static_cast<double>(channels - 1);
    for (std::size_t t = 0; t < T; ++t)
      rec.data(t, c) = own[t] + options.pre_common_loading * shared[t] + loading * factor[t];
  }
  return rec;
}

}  // namespace eegx
