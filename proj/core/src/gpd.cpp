#include "eegx/gpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eegx/error.hpp"
#include "eegx/optimize.hpp"
#include "eegx/rng.hpp"
#include "eegx/stats.hpp"

namespace eegx {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

double gpd_nll(std::span<const double> excesses, double sigma, double xi) {
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(xi)) return kInf;
  const auto n = static_cast<double>(excesses.size());
  if (std::abs(xi) < kXiZeroTolerance) {
    double sum = 0.0;
    for (double y : excesses) sum += y;
    return n * std::log(sigma) + sum / sigma;
  }
  double sum = 0.0;
  for (double y : excesses) {
    const double t = xi * y / sigma;
    if (!(t > -1.0)) return kInf;
    sum += std::log1p(t);
  }
  return n * std::log(sigma) + (1.0 + 1.0 / xi) * sum;
}

double gpd_survival(double y, double sigma, double xi) {
  if (y <= 0.0) return 1.0;
  if (std::abs(xi) < kXiZeroTolerance) return std::exp(-y / sigma);
  const double t = 1.0 + xi * y / sigma;
  if (t <= 0.0) return 0.0;
  return std::pow(t, -1.0 / xi);
}

double gpd_quantile(double p, double sigma, double xi) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("GPD quantile needs p in [0, 1)");
  if (std::abs(xi) < kXiZeroTolerance) return -sigma * std::log1p(-p);
  return sigma * (std::pow(1.0 - p, -xi) - 1.0) / xi;
}

std::pair<double, double> gpd_pwm(std::span<const double> excesses) {
  std::vector<double> s(excesses.begin(), excesses.end());
  std::sort(s.begin(), s.end());
  const auto n = static_cast<double>(s.size());
  double a0 = 0.0, a1 = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double p = (static_cast<double>(j + 1) - 0.35) / n;
    a0 += s[j];
    a1 += (1.0 - p) * s[j];
  }
  a0 /= n;
  a1 /= n;
  const double denom = a0 - 2.0 * a1;
  if (!(std::abs(denom) > 0.0)) return {a0, 0.0};
  const double k = a0 / denom - 2.0;
  const double sigma = 2.0 * a0 * a1 / denom;
  return {sigma, -k};
}

GpdFit fit_gpd(std::span<const double> excesses, const GpdFitOptions& options) {
  if (excesses.size() < kMinExceedances)
    throw SizeError("GPD fit needs at least " + std::to_string(kMinExceedances) + " excesses, got " +
                    std::to_string(excesses.size()));
  double max_y = 0.0;
  for (double y : excesses) {
    if (!(y > 0.0) || !std::isfinite(y)) throw ValidationError("GPD excesses must be strictly positive and finite");
    max_y = std::max(max_y, y);
  }

  auto objective = [&](const std::vector<double>& th) {
    if (!(th[1] > kXiLowerBound)) return kInf;
    return gpd_nll(excesses, std::exp(th[0]), th[1]);
  };

  auto [sigma0, xi0] = gpd_pwm(excesses);
  xi0 = std::clamp(std::isfinite(xi0) ? xi0 : 0.0, kXiLowerBound + 0.05, 0.95);
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) sigma0 = mean(excesses);
  if (xi0 < 0.0) sigma0 = std::max(sigma0, -xi0 * max_y * 1.01);

  NelderMeadOptions nm;
  nm.initial_step = 0.1;
  NelderMeadResult best = nelder_mead(objective, {std::log(sigma0), xi0}, nm);

  Rng rng(options.seed);
  for (int r = 0; r < options.restarts; ++r) {
    std::vector<double> start{best.x[0] + 0.2 * rng.normal(), best.x[1] + 0.1 * rng.normal()};
    start[1] = std::max(start[1], kXiLowerBound + 0.01);
    if (!std::isfinite(objective(start))) start = best.x;
    auto trial = nelder_mead(objective, start, nm);
    if (trial.value < best.value || (trial.converged && !best.converged)) best = trial;
  }
  if (!std::isfinite(best.value) || !best.converged)
    throw FitError("GPD optimiser did not converge (best nll " + std::to_string(best.value) + " after " +
                   std::to_string(options.restarts + 1) + " starts)");

  GpdFit fit;
  fit.sigma = std::exp(best.x[0]);
  fit.xi = best.x[1];
  fit.n_exceed = excesses.size();
  fit.nll = best.value;
  fit.on_boundary = fit.xi < kXiLowerBound + 1e-3;

  // Central finite-difference Hessian on (log sigma, xi).
  constexpr double h = 1e-4;
  const auto& th = best.x;
  auto f = [&](double dt, double dx) { return objective({th[0] + dt, th[1] + dx}); };
  const double f0 = best.value;
  const double h00 = (f(h, 0) - 2 * f0 + f(-h, 0)) / (h * h);
  const double h11 = (f(0, h) - 2 * f0 + f(0, -h)) / (h * h);
  const double h01 = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
  const double det = h00 * h11 - h01 * h01;
  if (std::isfinite(det) && det > 0.0 && h00 > 0.0) {
    const double v_tau = h11 / det;
    const double v_xi = h00 / det;
    const double c = -h01 / det;
    fit.se_sigma = fit.sigma * std::sqrt(v_tau);
    fit.se_xi = std::sqrt(v_xi);
    fit.cov_sigma_xi = fit.sigma * c;
  } else {
    fit.se_sigma = fit.se_xi = fit.cov_sigma_xi = kNaN;
  }
  return fit;
}

double return_level(const GpdFit& fit, double m) {
  const double mz = m * fit.zeta_u;
  if (!(mz > 1.0)) throw DomainError("return level needs m * zeta_u > 1, got " + std::to_string(mz));
  if (std::abs(fit.xi) < kXiZeroTolerance) return fit.threshold_u + fit.sigma * std::log(mz);
  return fit.threshold_u + fit.sigma / fit.xi * (std::pow(mz, fit.xi) - 1.0);
}

double return_level(const GpdFit& fit, double units, double obs_per_unit) {
  if (!(obs_per_unit > 0.0)) throw DomainError("observations per unit must be positive");
  return return_level(fit, units * obs_per_unit);
}

ClusterSet decluster_runs(std::span<const double> data, double threshold_u, std::size_t run_length_r) {
  if (run_length_r < 1) throw UsageError("run length must be at least 1");
  ClusterSet out;
  out.run_length_r = run_length_r;
  out.threshold_u = threshold_u;
  bool open = false;
  std::size_t last = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(data[i] > threshold_u)) continue;
    ++out.n_exceedances;
    if (!open || i - last - 1 > run_length_r) {
      out.cluster_peaks.push_back({i, data[i]});
      open = true;
    } else if (data[i] > out.cluster_peaks.back().value) {
      out.cluster_peaks.back() = {i, data[i]};
    }
    last = i;
  }
  return out;
}

MeanResidualLife mean_residual_life(std::span<const double> data, std::span<const double> grid) {
  if (grid.empty()) throw UsageError("mean residual life: empty threshold grid");
  MeanResidualLife out;
  out.grid.assign(grid.begin(), grid.end());
  for (double u : grid) {
    double sum = 0.0, sumsq = 0.0;
    std::size_t n = 0;
    for (double x : data)
      if (x > u) {
        sum += x - u;
        sumsq += (x - u) * (x - u);
        ++n;
      }
    out.n_exceed.push_back(n);
    if (n < kMinExceedances) {
      out.mean_excess.push_back(kNaN);
      out.ci_low.push_back(kNaN);
      out.ci_high.push_back(kNaN);
      out.flagged.push_back(true);
      continue;
    }
    const double nn = static_cast<double>(n);
    const double m = sum / nn;
    const double sd = std::sqrt(std::max(0.0, (sumsq - nn * m * m) / (nn - 1.0)));
    const double half = 1.96 * sd / std::sqrt(nn);
    out.mean_excess.push_back(m);
    out.ci_low.push_back(m - half);
    out.ci_high.push_back(m + half);
    out.flagged.push_back(false);
  }
  return out;
}

ParameterStability parameter_stability(std::span<const double> data, std::span<const double> grid,
                                       const GpdFitOptions& options) {
  if (grid.empty()) throw UsageError("parameter stability: empty threshold grid");
  ParameterStability out;
  out.grid.assign(grid.begin(), grid.end());
  for (double u : grid) {
    std::vector<double> excess;
    for (double x : data)
      if (x > u) excess.push_back(x - u);
    out.n_exceed.push_back(excess.size());
    bool ok = false;
    if (excess.size() >= kMinExceedances) {
      try {
        const GpdFit fit = fit_gpd(excess, options);
        out.xi.push_back(fit.xi);
        out.se_xi.push_back(fit.se_xi);
        out.sigma_star.push_back(fit.sigma - fit.xi * u);
        const double v = fit.se_sigma * fit.se_sigma + u * u * fit.se_xi * fit.se_xi - 2.0 * u * fit.cov_sigma_xi;
        out.se_sigma_star.push_back(v >= 0.0 ? std::sqrt(v) : kNaN);
        ok = true;
      } catch (const Error&) {
      }
    }
    if (!ok) {
      out.xi.push_back(kNaN);
      out.se_xi.push_back(kNaN);
      out.sigma_star.push_back(kNaN);
      out.se_sigma_star.push_back(kNaN);
    }
    out.flagged.push_back(!ok);
  }
  return out;
}

std::vector<double> quantile_grid(std::span<const double> data, double p_low, double p_high, std::size_t points) {
  if (points < 2 || !(p_low < p_high)) throw UsageError("quantile grid needs p_low < p_high and 2+ points");
  std::vector<double> s(data.begin(), data.end());
  std::sort(s.begin(), s.end());
  const double lo = quantile_sorted(s, p_low);
  const double hi = quantile_sorted(s, p_high);
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

GpdFit fit_channel_tail(std::span<const double> series, double threshold_quantile, std::size_t run_length_r,
                        const GpdFitOptions& options) {
  if (!(threshold_quantile >= 0.8 && threshold_quantile <= 0.999))
    throw UsageError("threshold quantile must be in [0.8, 0.999]");
  if (series.size() < 2) throw SizeError("tail fit needs a nonempty series");
  const double u = quantile(series, threshold_quantile);
  const ClusterSet clusters = decluster_runs(series, u, run_length_r);
  if (clusters.n_clusters() < kMinExceedances)
    throw FitError("only " + std::to_string(clusters.n_clusters()) + " clusters above the " +
                   std::to_string(threshold_quantile) + " quantile; need " + std::to_string(kMinExceedances));
  std::vector<double> excess;
  excess.reserve(clusters.n_clusters());
  for (const auto& p : clusters.cluster_peaks) excess.push_back(p.value - u);
  GpdFit fit = fit_gpd(excess, options);
  fit.threshold_u = u;
  fit.zeta_u = static_cast<double>(clusters.n_clusters()) / static_cast<double>(series.size());
  return fit;
}

}  // namespace eegx
