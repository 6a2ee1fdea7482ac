#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eegx/gpd.hpp"

namespace eegx {

/// Standard Laplace quantile: log(2p) below the median, -log(2(1-p)) above.
double laplace_quantile(double p);
double laplace_cdf(double y);

/// Semiparametric margin: empirical CDF (rank / (n + 1)) below the threshold,
/// fitted GPD tail above it.
class MarginalTransform {
 public:
  MarginalTransform() = default;

  /// Threshold at the q-quantile; GPD fitted to every exceedance with zeta_u the
  /// exceedance fraction, so both branches agree at the splice.
  static MarginalTransform fit(std::string channel, std::span<const double> sample,
                               double threshold_quantile = 0.95, const GpdFitOptions& options = {});

  const std::string& channel() const noexcept { return channel_; }
  const GpdFit& gpd() const noexcept { return gpd_; }
  std::span<const double> sorted_sample() const noexcept { return sorted_; }

  /// Probability F(x), clamped to [1/(2n), 1 - 1/(2n)].
  double cdf(double x) const;
  /// Inverse of cdf on the unclamped range.
  double inverse_cdf(double p) const;

  double to_laplace(double x) const { return laplace_quantile(cdf(x)); }
  double from_laplace(double y) const { return inverse_cdf(laplace_cdf(y)); }

  std::vector<double> to_laplace(std::span<const double> x) const;
  std::vector<double> from_laplace(std::span<const double> y) const;

  /// Number of points clamped at the fitted upper endpoint (xi < 0) since construction.
  std::size_t endpoint_clamps() const noexcept { return endpoint_clamps_; }

 private:
  std::string channel_;
  GpdFit gpd_;
  std::vector<double> sorted_;
  mutable std::size_t endpoint_clamps_ = 0;
};

inline constexpr std::size_t kMinConditioningExceedances = 30;
inline constexpr double kAlphaMin = -1.0;
inline constexpr double kAlphaMax = 1.0;
inline constexpr double kBetaMin = -3.0;
inline constexpr double kBetaMax = 1.0 - 1e-6;

/// Y_dep = alpha * y + y^beta * Z for conditioning values y above the threshold,
/// with Z ~ (mu, s^2) under the Gaussian working likelihood.
struct HtFit {
  std::string cond_channel;
  std::string dep_channel;
  double alpha = 0.0;
  double beta = 0.0;
  double mu = 0.0;
  double s = 1.0;
  double cond_threshold_laplace = 0.0;
  double cond_quantile = 0.0;
  std::size_t n_exceed = 0;
  double nll = 0.0;
  std::vector<double> residuals_z;
  std::vector<std::size_t> exceed_index;  ///< sample index of each residual
  bool alpha_on_boundary = false;
  bool beta_on_boundary = false;
};

/// Negative log pseudo-likelihood at (alpha, beta, mu, s) over the given pairs.
double ht_nll(std::span<const double> y_cond, std::span<const double> y_dep, double alpha,
              double beta, double mu, double s);

/// Fits on pairs whose conditioning value exceeds the Laplace q-quantile.
HtFit fit_ht(std::span<const double> y_cond, std::span<const double> y_dep, double cond_quantile);

/// Fits on pairs whose conditioning value exceeds `threshold` (Laplace scale).
HtFit fit_ht_above(std::span<const double> y_cond, std::span<const double> y_dep, double threshold);

/// Residuals standardised to unit-Laplace spread: (z - mu) / s * sqrt(2).
std::vector<double> standardized_residuals(const HtFit& fit);

struct ConditionalSample {
  std::string cond_channel;
  std::vector<std::string> dep_channels;
  double cond_level_laplace = 0.0;
  std::vector<double> cond_draws;     ///< Laplace scale, each > cond_level_laplace
  std::vector<std::vector<double>> draws;            ///< [channel][sim], Laplace scale
  std::vector<std::vector<double>> back_transformed; ///< [channel][sim], data scale (empty if no margins)
  std::vector<double> cond_back_transformed;
};

/// Draws conditioning values beyond the Laplace level_q quantile and resamples residual
/// vectors jointly by time index across the dependent channels.
/// `margins` is either empty or holds the conditioning margin followed by one
/// margin per fit, in order.
ConditionalSample simulate_conditional(std::span<const HtFit> fits, double level_q,
                                       std::size_t n_sim, std::uint64_t seed,
                                       std::span<const MarginalTransform> margins = {});

struct SummaryRow {
  std::string channel;
  double mean = 0.0;
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double data_mean = 0.0;
  double data_median = 0.0;
  double data_q05 = 0.0;
  double data_q95 = 0.0;
  bool has_data_scale = false;
};

std::vector<SummaryRow> conditional_summary(const ConditionalSample& sample);

}  // namespace eegx
