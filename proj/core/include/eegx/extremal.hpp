#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eegx/recording.hpp"

namespace eegx {

/// rank / (n + 1) with average ranks on ties.
std::vector<double> uniform_scores(std::span<const double> x);

inline constexpr std::size_t kMinJointExceedances = 5;

struct ChiPoint {
  double chi = 0.0;
  double chibar = 0.0;
  std::size_t n_joint = 0;
};

/// Empirical chi(u) and chibar(u) from paired uniform scores. The marginal
/// exceedance probability is pooled over both margins, so comonotone pairs give
/// exactly 1 for both measures. Throws SparseTailError below kMinJointExceedances.
ChiPoint chi_u(std::span<const double> scores_x, std::span<const double> scores_y, double u);

/// Same estimator evaluated from exceedance counts.
ChiPoint chi_from_counts(std::size_t n, std::size_t count_x, std::size_t count_y,
                         std::size_t count_joint);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

enum class ChiStatus { ok, sparse, diagonal };

struct ChiEstimate {
  std::string channel_a;
  std::string channel_b;
  double u = 0.0;
  double chi = 0.0;
  double chibar = 0.0;
  Interval ci_chi;
  Interval ci_chibar;
  std::size_t n_eff = 0;  ///< joint exceedance count
  ChiStatus status = ChiStatus::ok;
};

/// Symmetric C x C table; entry (i, i) is the diagonal convention chi = chibar = 1.
struct ChiMatrix {
  std::vector<std::string> channels;
  double u = 0.0;
  std::vector<ChiEstimate> entries;  ///< row-major

  const ChiEstimate& at(std::size_t i, std::size_t j) const { return entries[i * channels.size() + j]; }
  std::size_t size() const noexcept { return channels.size(); }
};

/// Stationary bootstrap plan: a resample is a list of circular blocks over [0, n).
struct ResampleBlock {
  std::size_t start;
  std::size_t length;
};
using ResamplePlan = std::vector<ResampleBlock>;

/// Politis-Romano stationary bootstrap: geometric block lengths with the given mean,
/// uniform block starts, wrapping circularly, total length n.
ResamplePlan stationary_bootstrap_plan(std::size_t n, double mean_block_length, std::uint64_t seed);

struct ChiOptions {
  std::size_t n_boot = 200;
  double mean_block_length = 0.0;  ///< 0 selects the sampling rate (one second)
  std::uint64_t seed = 1;
  double ci_level = 0.95;
};

/// Pairwise chi/chibar over every channel pair with stationary-bootstrap percentile
/// intervals. Sparse pairs are flagged rather than failing the call.
ChiMatrix chi_matrix(const EegRecording& rec, double u, const ChiOptions& options = {});

/// One matrix per level, sharing scores and bootstrap plans.
std::vector<ChiMatrix> chi_matrices(const EegRecording& rec, std::span<const double> levels,
                                    const ChiOptions& options = {});

}  // namespace eegx
