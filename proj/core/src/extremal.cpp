#include "eegx/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eegx/error.hpp"
#include "eegx/parallel.hpp"
#include "eegx/rng.hpp"
#include "eegx/stats.hpp"

namespace eegx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Estimator without the sparsity check, shared by point estimates and bootstrap replicates.
ChiPoint chi_value(std::size_t n, std::size_t cx, std::size_t cy, std::size_t cj) {
  const double nn = static_cast<double>(n);
  const double marginal = static_cast<double>(cx + cy) / (2.0 * nn);
  const double joint = static_cast<double>(cj) / nn;
  ChiPoint out;
  out.n_joint = cj;
  out.chi = marginal > 0.0 ? std::clamp(joint / marginal, 0.0, 1.0) : 0.0;
  if (cj == 0) {
    out.chibar = -1.0;
  } else {
    const double lj = std::log(joint);
    out.chibar = lj == 0.0 ? 1.0 : std::clamp(2.0 * std::log(marginal) / lj - 1.0, -1.0, 1.0);
  }
  return out;
}

}  // namespace

std::vector<double> uniform_scores(std::span<const double> x) {
  if (x.size() < 2) throw SizeError("uniform scores need at least 2 values");
  auto r = average_ranks(x);
  const double denom = static_cast<double>(x.size()) + 1.0;
  for (double& v : r) v /= denom;
  return r;
}

ChiPoint chi_from_counts(std::size_t n, std::size_t count_x, std::size_t count_y, std::size_t count_joint) {
  if (count_joint < kMinJointExceedances)
    throw SparseTailError("only " + std::to_string(count_joint) + " joint exceedances (need " +
                          std::to_string(kMinJointExceedances) + "); lower the level u");
  return chi_value(n, count_x, count_y, count_joint);
}

ChiPoint chi_u(std::span<const double> scores_x, std::span<const double> scores_y, double u) {
  if (scores_x.size() != scores_y.size()) throw SizeError("chi: paired series differ in length");
  if (!(u > 0.0 && u < 1.0)) throw UsageError("chi: level u must be in (0, 1)");
  std::size_t cx = 0, cy = 0, cj = 0;
  for (std::size_t i = 0; i < scores_x.size(); ++i) {
    const bool ex = scores_x[i] > u;
    const bool ey = scores_y[i] > u;
    cx += ex;
    cy += ey;
    cj += ex && ey;
  }
  return chi_from_counts(scores_x.size(), cx, cy, cj);
}

ResamplePlan stationary_bootstrap_plan(std::size_t n, double mean_block_length, std::uint64_t seed) {
  if (n == 0) return {};
  if (!(mean_block_length >= 1.0)) throw UsageError("mean block length must be at least 1");
  Rng rng(seed);
  const double p = 1.0 / mean_block_length;
  const double log_q = std::log1p(-p);
  ResamplePlan plan;
  std::size_t filled = 0;
  while (filled < n) {
    std::size_t len = 1;
    if (p < 1.0) len += static_cast<std::size_t>(std::floor(std::log(rng.uniform()) / log_q));
    len = std::min(len, n - filled);
    plan.push_back({static_cast<std::size_t>(rng.below(n)), len});
    filled += len;
  }
  return plan;
}

namespace {

struct Prefix {
  std::vector<std::uint32_t> c;  // c[i] = count over [0, i)

  explicit Prefix(const std::vector<char>& flags) : c(flags.size() + 1, 0) {
    for (std::size_t i = 0; i < flags.size(); ++i) c[i + 1] = c[i] + static_cast<std::uint32_t>(flags[i]);
  }
  std::size_t total() const { return c.back(); }
  std::size_t count(const ResampleBlock& b) const {
    const std::size_t n = c.size() - 1;
    const std::size_t end = b.start + b.length;
    if (end <= n) return c[end] - c[b.start];
    return (c[n] - c[b.start]) + c[end - n];
  }
  std::size_t count(const ResamplePlan& plan) const {
    std::size_t s = 0;
    for (const auto& b : plan) s += count(b);
    return s;
  }
};

Interval percentile_interval(std::vector<double> v, double level) {
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  if (v.empty()) return {kNaN, kNaN};
  std::sort(v.begin(), v.end());
  const double a = (1.0 - level) / 2.0;
  return {quantile_sorted(v, a), quantile_sorted(v, 1.0 - a)};
}

}  // namespace

std::vector<ChiMatrix> chi_matrices(const EegRecording& rec, std::span<const double> levels,
                                    const ChiOptions& options) {
  const std::size_t C = rec.num_channels();
  const std::size_t n = rec.num_samples();
  if (C < 2) throw UsageError("chi matrix needs at least 2 channels");
  for (double u : levels)
    if (!(u > 0.0 && u < 1.0)) throw UsageError("chi: level u must be in (0, 1)");
  const double block = options.mean_block_length > 0.0 ? options.mean_block_length : rec.fs;

  std::vector<std::vector<double>> scores(C);
  parallel_for(C, [&](std::size_t c) { scores[c] = uniform_scores(rec.data.column(c)); });

  std::vector<ResamplePlan> plans(options.n_boot);
  for (std::size_t b = 0; b < options.n_boot; ++b)
    plans[b] = stationary_bootstrap_plan(n, block, derive_seed(options.seed, b));

  std::vector<ChiMatrix> out;
  for (double u : levels) {
    ChiMatrix m;
    m.channels = rec.channels;
    m.u = u;
    m.entries.resize(C * C);

    std::vector<std::vector<char>> flags(C, std::vector<char>(n));
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < n; ++i) flags[c][i] = scores[c][i] > u;
    std::vector<Prefix> marginal;
    marginal.reserve(C);
    for (std::size_t c = 0; c < C; ++c) marginal.emplace_back(flags[c]);

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < C; ++i)
      for (std::size_t j = i + 1; j < C; ++j) pairs.emplace_back(i, j);

    parallel_for(pairs.size(), [&](std::size_t k) {
      const auto [i, j] = pairs[k];
      std::vector<char> both(n);
      for (std::size_t t = 0; t < n; ++t) both[t] = flags[i][t] && flags[j][t];
      const Prefix joint(both);

      ChiEstimate e;
      e.channel_a = rec.channels[i];
      e.channel_b = rec.channels[j];
      e.u = u;
      e.n_eff = joint.total();
      if (joint.total() < kMinJointExceedances) {
        e.status = ChiStatus::sparse;
        e.chi = e.chibar = kNaN;
        e.ci_chi = e.ci_chibar = {kNaN, kNaN};
      } else {
        const ChiPoint pt = chi_value(n, marginal[i].total(), marginal[j].total(), joint.total());
        e.chi = pt.chi;
        e.chibar = pt.chibar;
        std::vector<double> rc, rcb;
        rc.reserve(plans.size());
        rcb.reserve(plans.size());
        for (const auto& plan : plans) {
          const ChiPoint r = chi_value(n, marginal[i].count(plan), marginal[j].count(plan), joint.count(plan));
          rc.push_back(r.chi);
          rcb.push_back(r.chibar);
        }
        e.ci_chi = percentile_interval(std::move(rc), options.ci_level);
        e.ci_chibar = percentile_interval(std::move(rcb), options.ci_level);
      }
      ChiEstimate mirrored = e;
      std::swap(mirrored.channel_a, mirrored.channel_b);
      m.entries[i * C + j] = std::move(e);
      m.entries[j * C + i] = std::move(mirrored);
    });

    for (std::size_t c = 0; c < C; ++c) {
      ChiEstimate d;
      d.channel_a = d.channel_b = rec.channels[c];
      d.u = u;
      d.chi = d.chibar = 1.0;
      d.ci_chi = d.ci_chibar = {1.0, 1.0};
      d.n_eff = marginal[c].total();
      d.status = ChiStatus::diagonal;
      m.entries[c * C + c] = d;
    }
    out.push_back(std::move(m));
  }
  return out;
}

ChiMatrix chi_matrix(const EegRecording& rec, double u, const ChiOptions& options) {
  const double levels[] = {u};
  return std::move(chi_matrices(rec, levels, options).front());
}

}  // namespace eegx
