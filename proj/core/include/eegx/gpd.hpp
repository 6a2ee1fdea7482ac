#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace eegx {

/// Peaks-over-threshold fit: excesses over threshold_u follow GPD(sigma, xi),
/// exceeded with probability zeta_u per observation.
struct GpdFit {
  double threshold_u = 0.0;
  double sigma = 1.0;
  double xi = 0.0;
  double zeta_u = 1.0;
  std::size_t n_exceed = 0;
  double se_sigma = 0.0;
  double se_xi = 0.0;
  double cov_sigma_xi = 0.0;
  double nll = 0.0;
  bool on_boundary = false;  ///< xi estimate sits on the lower bound
};

inline constexpr std::size_t kMinExceedances = 10;
inline constexpr double kXiLowerBound = -0.5;
/// |xi| below this is treated as the exponential limit.
inline constexpr double kXiZeroTolerance = 1e-6;

/// Negative log-likelihood of GPD(sigma, xi) for positive excesses; +inf outside the support.
double gpd_nll(std::span<const double> excesses, double sigma, double xi);

/// Probability-weighted-moments estimate (sigma, xi), used as the optimiser start.
std::pair<double, double> gpd_pwm(std::span<const double> excesses);

/// GPD survival function P(Y > y) for an excess y >= 0.
double gpd_survival(double y, double sigma, double xi);

/// GPD quantile of an excess: y with P(Y > y) = 1 - p.
double gpd_quantile(double p, double sigma, double xi);

struct GpdFitOptions {
  std::uint64_t seed = 0x5eed;  ///< restart jitter
  int restarts = 3;
};

/// Maximum likelihood over (log sigma, xi), xi > -0.5. threshold_u and zeta_u are
/// left at their defaults for the caller to fill.
GpdFit fit_gpd(std::span<const double> excesses, const GpdFitOptions& options = {});

/// Level exceeded on average once every m observations:
/// x_m = u + sigma/xi * ((m zeta_u)^xi - 1), or u + sigma log(m zeta_u) as xi -> 0.
double return_level(const GpdFit& fit, double m);

/// Return level for a horizon expressed in units (e.g. seconds), with obs_per_unit
/// observations per unit.
double return_level(const GpdFit& fit, double units, double obs_per_unit);

struct ClusterPeak {
  std::size_t index;
  double value;
};

struct ClusterSet {
  std::size_t run_length_r = 1;
  double threshold_u = 0.0;
  std::size_t n_exceedances = 0;
  std::vector<ClusterPeak> cluster_peaks;

  std::size_t n_clusters() const noexcept { return cluster_peaks.size(); }
};

/// Runs declustering: an exceedance starts a new cluster when more than r
/// consecutive sub-threshold samples separate it from the previous exceedance.
/// Each cluster keeps its maximum (earliest index on ties).
ClusterSet decluster_runs(std::span<const double> data, double threshold_u, std::size_t run_length_r);

struct MeanResidualLife {
  std::vector<double> grid;
  std::vector<double> mean_excess;  ///< NaN where flagged
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<std::size_t> n_exceed;
  std::vector<bool> flagged;  ///< fewer than kMinExceedances above the threshold
};

MeanResidualLife mean_residual_life(std::span<const double> data, std::span<const double> grid);

struct ParameterStability {
  std::vector<double> grid;
  std::vector<double> xi;           ///< NaN where flagged
  std::vector<double> se_xi;
  std::vector<double> sigma_star;   ///< modified scale sigma - xi * u
  std::vector<double> se_sigma_star;
  std::vector<std::size_t> n_exceed;
  std::vector<bool> flagged;
};

/// Fits a GPD at every threshold; a failing or under-populated threshold is flagged, not fatal.
ParameterStability parameter_stability(std::span<const double> data, std::span<const double> grid,
                                       const GpdFitOptions& options = {});

/// Evenly spaced thresholds between the p_low and p_high empirical quantiles.
std::vector<double> quantile_grid(std::span<const double> data, double p_low, double p_high,
                                  std::size_t points);

/// Threshold at the q-quantile, runs declustering with run length r, GPD on the
/// cluster-peak excesses. zeta_u = clusters / T.
GpdFit fit_channel_tail(std::span<const double> series, double threshold_quantile,
                        std::size_t run_length_r, const GpdFitOptions& options = {});

}  // namespace eegx
