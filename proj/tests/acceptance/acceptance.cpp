// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <unistd.h>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "eegx/conditional.hpp"
#include "eegx/extremal.hpp"
#include "eegx/gpd.hpp"
#include "eegx/preprocess.hpp"
#include "eegx/recording.hpp"
#include "eegx/simulate.hpp"
#include "eegx/spectral.hpp"
#include "eegx/stats.hpp"

namespace fs = std::filesystem;
using namespace eegx;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
    if (!ok) {
      pass = false;
      detail += " [x]";
    }
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("eegx_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::vector<double> to_laplace_exact(const std::vector<double>& u) {
  std::vector<double> y(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) y[i] = laplace_quantile(u[i]);
  return y;
}

// 1 ------------------------------------------------------------------------
Outcome dataset_geometry() {
  Outcome o;
  const fs::path csv = work_dir() / "geometry.csv";
  {
    std::ofstream f(csv, std::ios::binary);
    f << serialize_recording(gen_synthetic_eeg(19, 50000, 0.7, 11));
  }
  const auto t0 = Clock::now();
  const auto rec = load_recording(csv, 100.0, 35000);
  const auto ep = split_at_onset(rec);
  const double dt = seconds_since(t0);
  o.check(rec.num_samples() == 50000 && rec.num_channels() == 19, fmt("T=%zu C=%zu", rec.num_samples(), rec.num_channels()));
  o.check(ep.pre.num_samples() == 35000 && ep.post.num_samples() == 15000,
          fmt("epochs %zu/%zu", ep.pre.num_samples(), ep.post.num_samples()));
  o.check(dt < 2.0, fmt("load+split %.3f s", dt));
  return o;
}

// 2 ------------------------------------------------------------------------
Outcome band_table() {
  Outcome o;
  const auto bands = standard_bands();
  const std::array<BandDefinition, 5> expected{{{Band::delta, 0.5, 4.0},
                                                {Band::theta, 4.0, 8.0},
                                                {Band::alpha, 8.0, 12.0},
                                                {Band::beta, 13.0, 30.0},
                                                {Band::gamma, 30.0, 100.0}}};
  o.check(bands == expected, "edges 0.5-4/4-8/8-12/13-30/30-100 Hz");
  const auto gamma = design_bandpass(standard_band(Band::gamma), 100.0);
  o.check(gamma.design_high_hz == 49.5 && gamma.capped(), fmt("gamma upper edge at fs=100: %.4g Hz", gamma.design_high_hz));
  return o;
}

// 3 ------------------------------------------------------------------------
double interior_gain(const std::vector<double>& in, const std::vector<double>& out, std::size_t margin) {
  double a = 0.0, b = 0.0;
  for (std::size_t i = margin; i + margin < in.size(); ++i) {
    a += in[i] * in[i];
    b += out[i] * out[i];
  }
  return std::sqrt(b / a);
}

Outcome filter_fidelity() {
  Outcome o;
  const double fs = 100.0;
  const std::size_t n = 2000, margin = 200;
  std::vector<double> tone10(n), tone20(n), noise(n);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    tone10[i] = std::sin(2 * std::numbers::pi * 10.0 * t);
    tone20[i] = std::sin(2 * std::numbers::pi * 20.0 * t);
    noise[i] = nd(gen);
  }
  const auto t0 = Clock::now();
  const auto spec = design_bandpass(standard_band(Band::alpha), fs);
  const auto y10 = apply_zero_phase(tone10, spec);
  const double dt = seconds_since(t0);
  const auto y20 = apply_zero_phase(tone20, spec);
  const auto yn = apply_zero_phase(noise, spec);

  const double g10 = interior_gain(tone10, y10, margin), g20 = interior_gain(tone20, y20, margin);
  o.check(g10 >= 0.95 && g10 <= 1.0, fmt("10 Hz gain %.5f", g10));
  o.check(g20 <= 0.05, fmt("20 Hz gain %.2e", g20));

  int best_lag = 0;
  double best = -1e300;
  for (int lag = -50; lag <= 50; ++lag) {
    double s = 0.0;
    for (std::size_t i = margin; i + margin < n; ++i) s += noise[i] * yn[static_cast<std::size_t>(static_cast<long>(i) + lag)];
    if (s > best) best = s, best_lag = lag;
  }
  o.check(best_lag == 0, fmt("xcorr peak lag %d", best_lag));
  o.check(dt < 1.0, fmt("design+filter %.4f s", dt));
  return o;
}

// 4 ------------------------------------------------------------------------
Outcome spectral_parseval() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(1.5, 2.0);
    std::vector<double> x(1000 + seed);  // mix of even and odd lengths
    for (double& v : x) v = nd(gen);
    const double fs = 100.0;
    const auto p = periodogram(x, fs);
    double integral = 0.0;
    for (double v : p.power) integral += v;
    integral *= fs / static_cast<double>(x.size());
    worst = std::max(worst, std::abs(integral - variance_n(x)) / variance_n(x));
  }
  o.check(worst <= 1e-8, fmt("max relative error %.2e over 10 series", worst));
  return o;
}

// 5 ------------------------------------------------------------------------
Outcome gpd_recovery() {
  Outcome o;
  auto t0 = Clock::now();
  const GpdFit f = fit_gpd(gen_gpd(10000, 2.0, 0.2, 2024));
  const double dt1 = seconds_since(t0);
  o.check(std::abs(f.sigma - 2.0) <= 3 * f.se_sigma, fmt("sigma %.4f (se %.4f)", f.sigma, f.se_sigma));
  o.check(std::abs(f.xi - 0.2) <= 3 * f.se_xi, fmt("xi %.4f (se %.4f)", f.xi, f.se_xi));
  t0 = Clock::now();
  const GpdFit e = fit_gpd(gen_gpd(50000, 1.0, 0.0, 2025));
  const double dt2 = seconds_since(t0);
  o.check(std::abs(e.xi) < 0.05, fmt("exponential xi %.4f", e.xi));
  o.check(dt1 < 1.0 && dt2 < 1.0, fmt("fits %.3f s / %.3f s", dt1, dt2));
  return o;
}

// 6 ------------------------------------------------------------------------
Outcome return_levels() {
  Outcome o;
  GpdFit f;
  f.threshold_u = 5.0;
  f.sigma = 2.0;
  f.xi = 0.5;
  f.zeta_u = 1.0;
  const double x = return_level(f, 100.0);
  o.check(x == 41.0, fmt("xi=0.5 level %.17g", x));
  f.xi = 0.0;
  const double x0 = return_level(f, 100.0), closed = 5.0 + 2.0 * std::log(100.0);
  o.check(std::abs(x0 - closed) <= 1e-12, fmt("xi=0 gap %.1e", std::abs(x0 - closed)));
  return o;
}

// 7 ------------------------------------------------------------------------
// Joint exceedance frequency of 10^6 bivariate normal draws above the known marginal quantile.
double gaussian_chi_oracle(double rho, std::size_t n) {
  std::mt19937_64 gen(777);
  std::normal_distribution<double> nd;
  const double z95 = 1.6448536269514722;
  std::size_t joint = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = nd(gen);
    const double b = rho * a + std::sqrt(1.0 - rho * rho) * nd(gen);
    joint += a > z95 && b > z95;
  }
  return static_cast<double>(joint) / (static_cast<double>(n) * 0.05);
}

Outcome chi_calibration() {
  Outcome o;
  const auto c = gen_comonotone_pair(20000, 1);
  const auto cc = chi_u(uniform_scores(c.x), uniform_scores(c.y), 0.95);
  o.check(cc.chi == 1.0 && cc.chibar == 1.0, fmt("comonotone chi %.17g chibar %.17g", cc.chi, cc.chibar));

  const auto ind = gen_independent_pair(20000, 2);
  const auto ci = chi_u(uniform_scores(ind.x), uniform_scores(ind.y), 0.95);
  o.check(ci.chi >= 0.03 && ci.chi <= 0.07, fmt("independent chi %.4f", ci.chi));
  o.check(ci.chibar >= -0.1 && ci.chibar <= 0.1, fmt("chibar %.4f", ci.chibar));

  const double oracle = gaussian_chi_oracle(0.5, 1000000);
  const auto g = gen_gaussian_copula_pair(100000, 0.5, 3);
  const auto cg = chi_u(uniform_scores(g.x), uniform_scores(g.y), 0.95);
  o.check(std::abs(cg.chi - oracle) <= 0.02, fmt("gaussian chi %.4f vs oracle %.4f", cg.chi, oracle));
  return o;
}

// 8 ------------------------------------------------------------------------
Outcome ht_recovery() {
  Outcome o;
  constexpr std::uint64_t kSeed = 1;  // fixed in advance
  const auto t0 = Clock::now();
  const auto p = gen_gaussian_copula_pair(100000, 0.6, kSeed);
  const auto yc = to_laplace_exact(p.x), yd = to_laplace_exact(p.y);
  HtFit f = fit_ht(yc, yd, 0.99);
  f.cond_channel = "x";
  f.dep_channel = "y";
  o.check(std::abs(f.alpha - 0.36) <= 0.12, fmt("alpha %.4f", f.alpha));
  o.check(std::abs(f.beta - 0.5) <= 0.2, fmt("beta %.4f", f.beta));

  // self-consistency: simulate from the fit, refit on the simulated pairs
  const auto s = simulate_conditional(std::span(&f, 1), 0.99, 100000, kSeed);
  const HtFit g = fit_ht_above(s.cond_draws, s.draws[0], f.cond_threshold_laplace);
  o.check(std::abs(g.alpha - f.alpha) <= 0.1 && std::abs(g.beta - f.beta) <= 0.2,
          fmt("refit alpha %.4f beta %.4f", g.alpha, g.beta));
  const double dt = seconds_since(t0);
  o.check(dt < 30.0, fmt("%.2f s", dt));
  return o;
}

// 9 ------------------------------------------------------------------------
Outcome ht_degenerate() {
  Outcome o;
  const auto c = gen_comonotone_pair(50000, 4);
  const auto yc = to_laplace_exact(c.x);
  const HtFit fc = fit_ht(yc, yc, 0.95);
  o.check(fc.alpha >= 0.95, fmt("comonotone alpha %.4f", fc.alpha));

  const auto ind = gen_independent_pair(50000, 5);
  const HtFit fi = fit_ht(to_laplace_exact(ind.x), to_laplace_exact(ind.y), 0.95);
  o.check(std::abs(fi.alpha) <= 0.1, fmt("independent alpha %.4f", fi.alpha));
  auto z = standardized_residuals(fi);
  std::sort(z.begin(), z.end());
  double gap = 0.0;
  for (int k = 1; k <= 9; ++k) {
    const double p = k / 10.0;
    gap = std::max(gap, std::abs(quantile_sorted(z, p) - laplace_quantile(p)));
  }
  o.check(gap < 0.15, fmt("Laplace QQ max gap %.4f (deciles, %zu residuals)", gap, z.size()));
  return o;
}

// 10 -----------------------------------------------------------------------
struct ReportTiming {
  double seconds = -1.0;
  int exit_code = -1;
};

ReportTiming run_report(const fs::path& csv, const fs::path& out_dir) {
  std::ostringstream out, err;
  const auto t0 = Clock::now();
  ReportTiming r;
  r.exit_code = cli::run({"report", "--input", csv.string(), "--out-dir", out_dir.string(), "--seed", "7"}, out, err);
  r.seconds = seconds_since(t0);
  if (r.exit_code != 0) std::cerr << err.str();
  return r;
}

const fs::path& report_input() {
  static const fs::path csv = [] {
    const fs::path p = work_dir() / "seizure.csv";
    const auto rec = gen_synthetic_eeg(19, 50000, 0.7, 2026);
    std::ofstream(p, std::ios::binary) << serialize_recording(rec);
    std::ofstream(sidecar_path(p), std::ios::binary) << sidecar_json(rec);
    return p;
  }();
  return csv;
}

Outcome seizure_contrast() {
  Outcome o;
  constexpr int kRuns = 100;
  int runs_ok = 0;
  std::size_t pairs_ok = 0, pairs_total = 0;
  const auto t0 = Clock::now();
  for (int seed = 1; seed <= kRuns; ++seed) {
    const auto rec = gen_synthetic_eeg(19, 50000, 0.7, static_cast<std::uint64_t>(seed));
    const auto ep = split_at_onset(rec);
    bool all = true;
    std::vector<double> alpha[2], chi[2];
    int e = 0;
    for (const EegRecording* r : {&ep.pre, &ep.post}) {
      std::vector<MarginalTransform> margins(19);
      std::vector<std::vector<double>> y(19), scores(19);
      for (std::size_t c = 0; c < 19; ++c) {
        const auto x = r->data.column(c);
        margins[c] = MarginalTransform::fit(r->channels[c], x, 0.95);
        y[c] = margins[c].to_laplace(x);
        scores[c] = uniform_scores(x);
      }
      for (std::size_t c = 1; c < 19; ++c) {
        alpha[e].push_back(fit_ht(y[0], y[c], 0.95).alpha);
        chi[e].push_back(chi_u(scores[0], scores[c], 0.95).chi);
      }
      ++e;
    }
    for (std::size_t k = 0; k < 18; ++k) {
      const bool ok = chi[1][k] > chi[0][k] && alpha[1][k] > alpha[0][k];
      pairs_ok += ok;
      ++pairs_total;
      all = all && ok;
    }
    runs_ok += all;
  }
  const double sweep = seconds_since(t0);
  o.check(runs_ok >= 95, fmt("%d/%d runs with every T3 pairing contrasting (%zu/%zu pairs), sweep %.1f s", runs_ok, kRuns,
                             pairs_ok, pairs_total, sweep));

  const auto timing = run_report(report_input(), work_dir() / "report_a");
  o.check(timing.exit_code == 0 && timing.seconds < 180.0,
          fmt("full report exit %d in %.1f s", timing.exit_code, timing.seconds));
  const auto manifest = nlohmann::json::parse(slurp(work_dir() / "report_a" / "manifest.json"));
  o.check(manifest["stages"].size() >= 4, fmt("%zu manifest stages", manifest["stages"].size()));
  return o;
}

// 11 -----------------------------------------------------------------------
Outcome report_determinism() {
  Outcome o;
  const fs::path a = work_dir() / "report_a", b = work_dir() / "report_b";
  if (!fs::exists(a / "manifest.json")) run_report(report_input(), a);
  const auto timing = run_report(report_input(), b);
  o.check(timing.exit_code == 0, fmt("rerun exit %d", timing.exit_code));
  std::size_t files = 0, identical = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    const fs::path other = b / e.path().filename();
    identical += fs::exists(other) && slurp(e.path()) == slurp(other);
  }
  std::size_t files_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++files_b;
  o.check(files > 0 && identical == files && files == files_b, fmt("%zu/%zu artifacts byte-identical", identical, files));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"dataset geometry", dataset_geometry},
      {"band table", band_table},
      {"filter fidelity", filter_fidelity},
      {"spectral Parseval", spectral_parseval},
      {"GPD recovery", gpd_recovery},
      {"return level closed forms", return_levels},
      {"chi/chibar calibration", chi_calibration},
      {"Heffernan-Tawn recovery", ht_recovery},
      {"degenerate HT cases", ht_degenerate},
      {"end-to-end seizure contrast", seizure_contrast},
      {"report determinism", report_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail << std::endl;
  }
  std::error_code ec;
  fs::remove_all(work_dir(), ec);
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
