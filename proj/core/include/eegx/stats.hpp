#pragma once

#include <span>
#include <vector>

namespace eegx {

/// Type-7 (linear interpolation) quantile of an ascending-sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);

/// Type-7 quantile of an unsorted sample (copies and sorts).
double quantile(std::span<const double> x, double p);

/// Ranks 1..n with ties replaced by their average rank.
std::vector<double> average_ranks(std::span<const double> x);

double mean(std::span<const double> x);

/// Variance with divisor n (population form).
double variance_n(std::span<const double> x);

/// Pearson correlation; returns 0 when either side is constant.
double correlation(std::span<const double> x, std::span<const double> y);

/// Sample kurtosis m4 / m2^2 (not excess).
double kurtosis(std::span<const double> x);

/// Standard normal CDF.
double normal_cdf(double z);

}  // namespace eegx
