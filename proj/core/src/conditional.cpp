#include "eegx/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "eegx/error.hpp"
#include "eegx/optimize.hpp"
#include "eegx/parallel.hpp"
#include "eegx/rng.hpp"
#include "eegx/stats.hpp"

namespace eegx {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Lower bound on the residual scale; reached only by exactly deterministic pairs.
constexpr double kScaleFloor = 1e-10;
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}  // namespace

double laplace_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("Laplace quantile needs p in (0, 1)");
  return p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p));
}

double laplace_cdf(double y) { return y < 0.0 ? 0.5 * std::exp(y) : 1.0 - 0.5 * std::exp(-y); }

// ---------------------------------------------------------------------------
// Marginal transform

MarginalTransform MarginalTransform::fit(std::string channel, std::span<const double> sample,
                                         double threshold_quantile, const GpdFitOptions& options) {
  if (!(threshold_quantile > 0.0 && threshold_quantile < 1.0))
    throw UsageError("marginal threshold quantile must be in (0, 1)");
  MarginalTransform mt;
  mt.channel_ = std::move(channel);
  mt.sorted_.assign(sample.begin(), sample.end());
  std::sort(mt.sorted_.begin(), mt.sorted_.end());
  if (mt.sorted_.size() < 2) throw SizeError("marginal transform needs at least 2 values");

  const double u = quantile_sorted(mt.sorted_, threshold_quantile);
  const auto first_above = std::upper_bound(mt.sorted_.begin(), mt.sorted_.end(), u);
  std::vector<double> excess;
  for (auto it = first_above; it != mt.sorted_.end(); ++it) excess.push_back(*it - u);
  if (excess.size() < kMinExceedances)
    throw FitError("channel '" + mt.channel_ + "': only " + std::to_string(excess.size()) +
                   " values above the marginal threshold");
  mt.gpd_ = fit_gpd(excess, options);
  mt.gpd_.threshold_u = u;
  mt.gpd_.zeta_u = static_cast<double>(excess.size()) / static_cast<double>(mt.sorted_.size());
  return mt;
}

double MarginalTransform::cdf(double x) const {
  const double n = static_cast<double>(sorted_.size());
  const double lo = 1.0 / (2.0 * n);
  const double hi = 1.0 - lo;
  double p;
  if (x > gpd_.threshold_u) {
    const double y = x - gpd_.threshold_u;
    if (gpd_.xi < 0.0 && y >= -gpd_.sigma / gpd_.xi) {
      ++endpoint_clamps_;
      return hi;
    }
    p = 1.0 - gpd_.zeta_u * gpd_survival(y, gpd_.sigma, gpd_.xi);
  } else {
    const auto rank = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    p = static_cast<double>(rank) / (n + 1.0);
  }
  return std::clamp(p, lo, hi);
}

double MarginalTransform::inverse_cdf(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("inverse marginal CDF needs p in (0, 1)");
  if (p > 1.0 - gpd_.zeta_u) {
    const double tail = 1.0 - (1.0 - p) / gpd_.zeta_u;
    return gpd_.threshold_u + gpd_quantile(tail, gpd_.sigma, gpd_.xi);
  }
  const double n = static_cast<double>(sorted_.size());
  const double pos = std::clamp(p * (n + 1.0) - 1.0, 0.0, n - 1.0);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, sorted_.size() - 1);
  return sorted_[i] + (pos - static_cast<double>(i)) * (sorted_[j] - sorted_[i]);
}

std::vector<double> MarginalTransform::to_laplace(std::span<const double> x) const {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = to_laplace(x[i]);
  return out;
}

std::vector<double> MarginalTransform::from_laplace(std::span<const double> y) const {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = from_laplace(y[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Conditional model fit

double ht_nll(std::span<const double> y_cond, std::span<const double> y_dep, double alpha, double beta,
              double mu, double s) {
  if (y_cond.size() != y_dep.size()) throw SizeError("ht_nll: paired series differ in length");
  if (!(s > 0.0)) return kInf;
  double total = 0.0;
  for (std::size_t i = 0; i < y_cond.size(); ++i) {
    const double y = y_cond[i];
    if (!(y > 0.0)) return kInf;
    const double yb = std::pow(y, beta);
    const double r = (y_dep[i] - alpha * y - yb * mu) / (yb * s);
    total += std::log(yb * s) + 0.5 * r * r + kHalfLog2Pi;
  }
  return total;
}

namespace {

struct Profile {
  double nll;
  double mu;
  double s;
};

// Pseudo-likelihood with mu and s at their closed-form maximisers for fixed (alpha, beta).
Profile profile_nll(std::span<const double> y, std::span<const double> log_y, std::span<const double> yd,
                    double alpha, double beta, std::vector<double>& w) {
  const std::size_t m = y.size();
  double sum_log = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = (yd[i] - alpha * y[i]) * std::exp(-beta * log_y[i]);
    sum += w[i];
    sum_log += log_y[i];
  }
  const double nm = static_cast<double>(m);
  const double mu = sum / nm;
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) ss += (w[i] - mu) * (w[i] - mu);
  const double var = ss / nm;
  const double s = std::max(std::sqrt(var), kScaleFloor);
  const double nll = beta * sum_log + nm * std::log(s) + 0.5 * ss / (s * s) + nm * kHalfLog2Pi;
  return {nll, mu, s};
}

bool feasible(double alpha, double beta) {
  return alpha >= kAlphaMin && alpha <= kAlphaMax && beta >= kBetaMin && beta <= kBetaMax;
}

}  // namespace

HtFit fit_ht_above(std::span<const double> y_cond, std::span<const double> y_dep, double threshold) {
  if (y_cond.size() != y_dep.size()) throw SizeError("conditional fit: paired series differ in length");
  if (!(threshold > 0.0)) throw UsageError("conditioning threshold must be positive on the Laplace scale");

  std::vector<double> y, ly, yd;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < y_cond.size(); ++i) {
    if (y_cond[i] > threshold) {
      y.push_back(y_cond[i]);
      ly.push_back(std::log(y_cond[i]));
      yd.push_back(y_dep[i]);
      index.push_back(i);
    }
  }
  if (y.size() < kMinConditioningExceedances)
    throw SizeError("conditional fit needs at least " + std::to_string(kMinConditioningExceedances) +
                    " conditioning exceedances, got " + std::to_string(y.size()));

  std::vector<double> w(y.size());
  auto objective = [&](const std::vector<double>& th) {
    if (!feasible(th[0], th[1])) return kInf;
    return profile_nll(y, ly, yd, th[0], th[1], w).nll;
  };

  NelderMeadOptions nm;
  nm.initial_step = 0.1;
  nm.x_tolerance = 1e-7;
  nm.max_evaluations = 3000;

  bool any = false, any_converged = false;
  NelderMeadResult best;
  for (double a0 : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    for (double b0 : {-0.5, 0.0, 0.5}) {
      auto r = nelder_mead(objective, {a0, b0}, nm);
      if (!std::isfinite(r.value)) continue;
      any_converged = any_converged || r.converged;
      const double tol = 1e-9 * std::max(1.0, std::abs(r.value));
      if (!any || r.value < best.value - tol ||
          (std::abs(r.value - best.value) <= tol && std::abs(r.x[1]) < std::abs(best.x[1]))) {
        best = std::move(r);
        any = true;
      }
    }
  }
  if (any && !any_converged) {
    auto polished = nelder_mead(objective, best.x, nm);
    if (polished.value <= best.value) best = std::move(polished);
    any_converged = best.converged;
  }
  if (!any || !any_converged) throw FitError("conditional-extremes optimiser failed from every grid start");

  HtFit fit;
  fit.alpha = best.x[0];
  fit.beta = best.x[1];
  const Profile p = profile_nll(y, ly, yd, fit.alpha, fit.beta, w);
  fit.mu = p.mu;
  fit.s = p.s;
  fit.nll = p.nll;
  fit.cond_threshold_laplace = threshold;
  fit.n_exceed = y.size();
  fit.residuals_z = w;
  fit.exceed_index = std::move(index);
  constexpr double kEdge = 1e-4;
  fit.alpha_on_boundary = fit.alpha <= kAlphaMin + kEdge || fit.alpha >= kAlphaMax - kEdge;
  fit.beta_on_boundary = fit.beta <= kBetaMin + kEdge || fit.beta >= kBetaMax - kEdge;
  return fit;
}

HtFit fit_ht(std::span<const double> y_cond, std::span<const double> y_dep, double cond_quantile) {
  if (!(cond_quantile >= 0.9 && cond_quantile <= 0.999))
    throw UsageError("conditioning quantile must be in [0.9, 0.999]");
  HtFit fit = fit_ht_above(y_cond, y_dep, laplace_quantile(cond_quantile));
  fit.cond_quantile = cond_quantile;
  return fit;
}

std::vector<double> standardized_residuals(const HtFit& fit) {
  std::vector<double> out(fit.residuals_z.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (fit.residuals_z[i] - fit.mu) / fit.s * std::numbers::sqrt2;
  return out;
}

// ---------------------------------------------------------------------------
// Simulation

ConditionalSample simulate_conditional(std::span<const HtFit> fits, double level_q, std::size_t n_sim,
                                       std::uint64_t seed, std::span<const MarginalTransform> margins) {
  if (fits.empty()) throw UsageError("simulation needs at least one fitted pair");
  const HtFit& first = fits.front();
  if (first.residuals_z.empty()) throw UsageError("simulation needs a nonempty residual set");
  for (const auto& f : fits) {
    if (f.cond_channel != first.cond_channel) throw UsageError("fits do not share a conditioning channel");
    if (f.exceed_index != first.exceed_index || f.residuals_z.size() != first.residuals_z.size())
      throw UsageError("fits do not share residual sample indices");
    if (level_q < f.cond_quantile) throw UsageError("simulation level is below the fitting quantile");
  }
  if (!margins.empty() && margins.size() != fits.size() + 1)
    throw UsageError("margins must hold the conditioning margin followed by one per fit");

  const double t = laplace_quantile(level_q);
  if (!(t > 0.0)) throw UsageError("simulation level must lie in the upper half");
  const std::size_t K = fits.size();
  const std::size_t m = first.residuals_z.size();

  ConditionalSample out;
  out.cond_channel = first.cond_channel;
  for (const auto& f : fits) out.dep_channels.push_back(f.dep_channel);
  out.cond_level_laplace = t;
  out.cond_draws.resize(n_sim);
  out.draws.assign(K, std::vector<double>(n_sim));

  parallel_for(n_sim, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    const double y = t + rng.exponential();
    const std::size_t j = rng.below(m);
    out.cond_draws[i] = y;
    const double ly = std::log(y);
    for (std::size_t k = 0; k < K; ++k)
      out.draws[k][i] = fits[k].alpha * y + std::exp(fits[k].beta * ly) * fits[k].residuals_z[j];
  });

  if (!margins.empty()) {
    out.cond_back_transformed = margins[0].from_laplace(out.cond_draws);
    for (std::size_t k = 0; k < K; ++k) out.back_transformed.push_back(margins[k + 1].from_laplace(out.draws[k]));
  }
  return out;
}

std::vector<SummaryRow> conditional_summary(const ConditionalSample& sample) {
  if (sample.draws.empty() || sample.draws.front().empty()) throw UsageError("summary of an empty sample");
  std::vector<SummaryRow> rows;
  for (std::size_t k = 0; k < sample.draws.size(); ++k) {
    SummaryRow r;
    r.channel = sample.dep_channels.at(k);
    std::vector<double> s = sample.draws[k];
    std::sort(s.begin(), s.end());
    r.mean = mean(s);
    r.median = quantile_sorted(s, 0.5);
    r.q05 = quantile_sorted(s, 0.05);
    r.q95 = quantile_sorted(s, 0.95);
    if (k < sample.back_transformed.size()) {
      std::vector<double> d = sample.back_transformed[k];
      std::sort(d.begin(), d.end());
      r.data_mean = mean(d);
      r.data_median = quantile_sorted(d, 0.5);
      r.data_q05 = quantile_sorted(d, 0.05);
      r.data_q95 = quantile_sorted(d, 0.95);
      r.has_data_scale = true;
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace eegx
