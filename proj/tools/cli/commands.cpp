#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "cli/output.hpp"
#include "cli/svg.hpp"
#include "eegx/conditional.hpp"
#include "eegx/error.hpp"
#include "eegx/extremal.hpp"
#include "eegx/gpd.hpp"
#include "eegx/parallel.hpp"
#include "eegx/preprocess.hpp"
#include "eegx/recording.hpp"
#include "eegx/simulate.hpp"
#include "eegx/spectral.hpp"

namespace eegx::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kEpochs{"all", "pre", "post"};
const std::vector<std::string> kBandNames{"delta", "theta", "alpha", "beta", "gamma"};

std::string join_name(const std::string& stem, std::initializer_list<std::string> parts) {
  std::string out = stem;
  for (const auto& p : parts)
    if (!p.empty()) out += "." + p;
  return out;
}

std::string level_tag(double u) { return "u" + format_number(u); }

// ---------------------------------------------------------------------------
// Input handling shared by every subcommand that reads a recording.

struct InputArgs {
  std::string input;
  double fs = 0.0;
  std::size_t onset = 0;
  double onset_seconds = 0.0;
  std::string out_dir;
  CLI::Option* fs_opt = nullptr;
  CLI::Option* onset_opt = nullptr;
  CLI::Option* onset_seconds_opt = nullptr;
};

void add_input_options(CLI::App* sub, InputArgs& a) {
  sub->add_option("--input", a.input, "Recording CSV (header row of channel names)")->required();
  a.fs_opt = sub->add_option("--fs", a.fs, "Sampling rate in Hz (else taken from <input>.meta.json)")
                 ->check(CLI::PositiveNumber);
  a.onset_opt = sub->add_option("--onset", a.onset, "Seizure onset as a sample index");
  a.onset_seconds_opt = sub->add_option("--onset-seconds", a.onset_seconds, "Seizure onset in seconds")
                            ->check(CLI::NonNegativeNumber)
                            ->excludes(a.onset_opt);
  sub->add_option("--out-dir", a.out_dir, "Output directory (default: next to the input)");
}

struct Input {
  EegRecording rec;
  fs::path out_dir;
  std::string stem;
};

Input load_input(const InputArgs& a) {
  const fs::path path(a.input);
  const SidecarMeta meta = read_sidecar(path);
  double fs = 0.0;
  if (a.fs_opt->count() > 0) {
    fs = a.fs;
  } else if (meta.fs) {
    fs = *meta.fs;
  } else {
    throw UsageError("sampling rate unknown: pass --fs or provide " + sidecar_path(path).string());
  }
  std::optional<std::size_t> onset = meta.onset_index;
  if (a.onset_opt->count() > 0) onset = a.onset;
  if (a.onset_seconds_opt->count() > 0) onset = onset_from_seconds(a.onset_seconds, fs);

  Input in;
  in.rec = load_recording(path, fs, onset);
  in.out_dir = a.out_dir.empty() ? path.parent_path() : fs::path(a.out_dir);
  in.stem = path.stem().string();
  return in;
}

struct EpochView {
  EegRecording rec;
  std::size_t offset = 0;  ///< first sample of the epoch within the full recording
};

EpochView select_epoch(const EegRecording& rec, const std::string& epoch) {
  if (epoch == "all") return {rec, 0};
  if (!rec.onset_index) throw UsageError("--epoch " + epoch + " needs an onset (--onset, --onset-seconds or sidecar)");
  const auto pair = split_at_onset(rec);
  if (epoch == "pre") return {pair.pre, 0};
  return {pair.post, *rec.onset_index};
}

EegRecording apply_band(const EegRecording& rec, const std::string& band, int order = 4) {
  if (band.empty()) return rec;
  return filter_band(rec, band_from_name(band), order);
}

std::vector<std::string> resolve_channels(const EegRecording& rec, const std::vector<std::string>& requested) {
  if (requested.empty()) return rec.channels;
  for (const auto& name : requested) rec.channel_index(name);
  return requested;
}

// Rethrows computation failures with the channel named; input errors pass through.
[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const FormatError&) {
    throw;
  } catch (const DataError&) {
    throw;
  } catch (const ValidationError&) {
    throw;
  } catch (const UsageError&) {
    throw;
  } catch (const LookupError&) {
    throw;
  } catch (const std::exception& e) {
    throw FitError(context + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Builders shared by single subcommands and the report.

json gpd_json(const GpdFit& f, const std::string& channel, const std::string& band, const std::string& epoch,
              double q, std::size_t r, double fs) {
  json j;
  j["channel"] = channel;
  j["band"] = band.empty() ? json(nullptr) : json(band);
  j["u"] = f.threshold_u;
  j["sigma"] = f.sigma;
  j["xi"] = f.xi;
  j["zeta_u"] = f.zeta_u;
  j["n_exceed"] = f.n_exceed;
  j["se_sigma"] = f.se_sigma;
  j["se_xi"] = f.se_xi;
  j["nll"] = f.nll;
  j["on_boundary"] = f.on_boundary;
  j["epoch"] = epoch;
  j["threshold_quantile"] = q;
  j["run_length"] = r;
  json levels = json::array();
  for (double seconds : {10.0, 60.0, 300.0}) {
    json item;
    item["seconds"] = seconds;
    try {
      item["level"] = return_level(f, seconds, fs);
    } catch (const DomainError&) {
      item["level"] = nullptr;
    }
    levels.push_back(item);
  }
  j["return_levels"] = levels;
  return j;
}

std::string chi_csv(const std::vector<ChiMatrix>& matrices) {
  CsvWriter w({"channel_a", "channel_b", "u", "chi", "chi_lo", "chi_hi", "chibar", "chibar_lo", "chibar_hi",
               "n_joint", "status"});
  for (const auto& m : matrices)
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = i + 1; j < m.size(); ++j) {
        const auto& e = m.at(i, j);
        w.cell(e.channel_a).cell(e.channel_b).cell(e.u).cell(e.chi).cell(e.ci_chi.low).cell(e.ci_chi.high);
        w.cell(e.chibar).cell(e.ci_chibar.low).cell(e.ci_chibar.high).cell(e.n_eff);
        w.cell(e.status == ChiStatus::sparse ? "sparse" : "ok");
        w.end_row();
      }
  return w.str();
}

struct HtBundle {
  std::vector<MarginalTransform> margins;  ///< conditioning margin first, then one per fit
  std::vector<HtFit> fits;
  std::vector<double> y_cond;
  std::size_t offset = 0;
};

HtBundle fit_ht_bundle(const EpochView& view, const std::string& cond, const std::vector<std::string>& deps,
                       double quantile, double margin_quantile, std::uint64_t seed) {
  const EegRecording& rec = view.rec;
  rec.channel_index(cond);
  std::vector<std::string> names{cond};
  for (const auto& d : deps) {
    if (d == cond) throw UsageError("dependent channel equals the conditioning channel '" + cond + "'");
    rec.channel_index(d);
    names.push_back(d);
  }
  if (names.size() < 2) throw UsageError("no dependent channels to fit");

  HtBundle b;
  b.offset = view.offset;
  b.margins.resize(names.size());
  std::vector<std::vector<double>> laplace(names.size());
  GpdFitOptions gopt;
  gopt.seed = seed;
  parallel_for(names.size(), [&](std::size_t k) {
    try {
      const auto x = rec.channel(names[k]);
      b.margins[k] = MarginalTransform::fit(names[k], x, margin_quantile, gopt);
      laplace[k] = b.margins[k].to_laplace(x);
    } catch (...) {
      rethrow_with_context("margin of channel '" + names[k] + "'");
    }
  });
  b.y_cond = laplace[0];
  b.fits.resize(names.size() - 1);
  parallel_for(b.fits.size(), [&](std::size_t k) {
    try {
      HtFit f = fit_ht(b.y_cond, laplace[k + 1], quantile);
      f.cond_channel = cond;
      f.dep_channel = names[k + 1];
      b.fits[k] = std::move(f);
    } catch (...) {
      rethrow_with_context("pair " + cond + " -> " + names[k + 1]);
    }
  });
  return b;
}

json ht_json(const HtBundle& b, double quantile, double margin_quantile, const std::string& epoch,
             const std::string& band) {
  json j;
  j["cond_channel"] = b.fits.front().cond_channel;
  j["quantile"] = quantile;
  j["margin_quantile"] = margin_quantile;
  j["epoch"] = epoch;
  j["band"] = band.empty() ? json(nullptr) : json(band);
  j["cond_threshold_laplace"] = b.fits.front().cond_threshold_laplace;
  j["n_exceed"] = b.fits.front().n_exceed;
  json pairs = json::array();
  for (const auto& f : b.fits) {
    json p;
    p["dep_channel"] = f.dep_channel;
    p["alpha"] = f.alpha;
    p["beta"] = f.beta;
    p["mu"] = f.mu;
    p["s"] = f.s;
    p["n_exceed"] = f.n_exceed;
    p["nll"] = f.nll;
    p["alpha_on_boundary"] = f.alpha_on_boundary;
    p["beta_on_boundary"] = f.beta_on_boundary;
    pairs.push_back(p);
  }
  j["pairs"] = pairs;
  return j;
}

std::string ht_residuals_csv(const HtBundle& b) {
  const auto& first = b.fits.front();
  std::vector<std::string> header{"sample_index", "y_" + first.cond_channel};
  for (const auto& f : b.fits) header.push_back("z_" + f.dep_channel);
  CsvWriter w(header);
  for (std::size_t k = 0; k < first.n_exceed; ++k) {
    w.cell(first.exceed_index[k] + b.offset).cell(b.y_cond[first.exceed_index[k]]);
    for (const auto& f : b.fits) w.cell(f.residuals_z[k]);
    w.end_row();
  }
  return w.str();
}

std::string sim_draws_csv(const ConditionalSample& s) {
  std::vector<std::string> header{"sim", s.cond_channel + "_laplace"};
  for (const auto& d : s.dep_channels) header.push_back(d + "_laplace");
  header.push_back(s.cond_channel);
  for (const auto& d : s.dep_channels) header.push_back(d);
  CsvWriter w(header);
  for (std::size_t i = 0; i < s.cond_draws.size(); ++i) {
    w.cell(i).cell(s.cond_draws[i]);
    for (const auto& d : s.draws) w.cell(d[i]);
    w.cell(s.cond_back_transformed[i]);
    for (const auto& d : s.back_transformed) w.cell(d[i]);
    w.end_row();
  }
  return w.str();
}

std::string sim_summary_csv(const std::vector<SummaryRow>& rows) {
  CsvWriter w({"channel", "mean", "median", "q05", "q95", "data_mean", "data_median", "data_q05", "data_q95"});
  for (const auto& r : rows) {
    w.cell(r.channel).cell(r.mean).cell(r.median).cell(r.q05).cell(r.q95);
    w.cell(r.data_mean).cell(r.data_median).cell(r.data_q05).cell(r.data_q95);
    w.end_row();
  }
  return w.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Subcommands. Each registers its options and returns the action run after parsing.

using Action = std::function<int(std::ostream& out, std::ostream& err)>;

struct Registered {
  CLI::App* sub;
  Action action;
};

struct SimulateArgs {
  std::string kind = "synthetic_eeg";
  std::size_t channels = 19;
  std::size_t samples = 50000;
  double onset_fraction = 0.7;
  double fs = 100.0;
  double sigma = 1.0;
  double xi = 0.0;
  double rho = 0.5;
  std::uint64_t seed = 1;
  std::string output;
};

Registered add_simulate(CLI::App& app) {
  auto a = std::make_shared<SimulateArgs>();
  auto* sub = app.add_subcommand("simulate", "Write a seeded synthetic dataset as CSV plus sidecar");
  sub->add_option("--kind", a->kind, "Generator")
      ->check(CLI::IsMember({"synthetic_eeg", "gpd", "exponential", "gaussian_copula_pair", "comonotone_pair",
                             "independent_pair"}));
  sub->add_option("--channels", a->channels, "Channels (synthetic_eeg)")->check(CLI::Range(2, 10000));
  sub->add_option("--samples", a->samples, "Samples per channel")->check(CLI::PositiveNumber);
  sub->add_option("--onset-fraction", a->onset_fraction, "Onset position as a fraction of the samples")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--fs", a->fs, "Sampling rate written to the sidecar")->check(CLI::PositiveNumber);
  sub->add_option("--sigma", a->sigma, "GPD scale")->check(CLI::PositiveNumber);
  sub->add_option("--xi", a->xi, "GPD shape");
  sub->add_option("--rho", a->rho, "Gaussian copula correlation")->check(CLI::Range(-0.999999, 0.999999));
  sub->add_option("--seed", a->seed, "Generator seed");
  sub->add_option("--output", a->output, "Output CSV path")->required();

  return {sub, [a](std::ostream& out, [[maybe_unused]] std::ostream& err) {
    EegRecording rec;
    if (a->kind == "synthetic_eeg") {
      SyntheticEegOptions opt;
      opt.fs = a->fs;
      rec = gen_synthetic_eeg(a->channels, a->samples, a->onset_fraction, a->seed, opt);
    } else {
      rec.fs = a->fs;
      if (a->kind == "gpd" || a->kind == "exponential") {
        const auto y = gen_gpd(a->samples, a->sigma, a->kind == "gpd" ? a->xi : 0.0, a->seed);
        rec.channels = {"y"};
        rec.data = Matrix(y.size(), 1);
        rec.data.set_column(0, y);
      } else {
        UniformPairs p;
        if (a->kind == "gaussian_copula_pair") p = gen_gaussian_copula_pair(a->samples, a->rho, a->seed);
        if (a->kind == "comonotone_pair") p = gen_comonotone_pair(a->samples, a->seed);
        if (a->kind == "independent_pair") p = gen_independent_pair(a->samples, a->seed);
        rec.channels = {"x", "y"};
        rec.data = Matrix(p.x.size(), 2);
        rec.data.set_column(0, p.x);
        rec.data.set_column(1, p.y);
      }
    }
    ArtifactSet art;
    const fs::path path(a->output);
    art.add(path, serialize_recording(rec));
    art.add(sidecar_path(path), sidecar_json(rec));
    art.commit(out);
    return kExitOk;
  }};
}

struct DecomposeArgs {
  InputArgs in;
  int order = 4;
};

Registered add_decompose(CLI::App& app) {
  auto a = std::make_shared<DecomposeArgs>();
  auto* sub = app.add_subcommand("decompose", "Split every channel into the standard EEG bands");
  add_input_options(sub, a->in);
  sub->add_option("--order", a->order, "Band-pass order (even, 2-8)")->check(CLI::IsMember({2, 4, 6, 8}));
  return {sub, [a](std::ostream& out, [[maybe_unused]] std::ostream& err) {
    const Input in = load_input(a->in);
    const BandDecomposition d = decompose_bands(in.rec, a->order);
    ArtifactSet art;
    for (const auto& [band, m] : d.bands) {
      const EegRecording br = d.band_recording(band, in.rec);
      const fs::path path = in.out_dir / (join_name(in.stem, {std::string(band_name(band))}) + ".csv");
      art.add(path, serialize_recording(br));
      art.add(sidecar_path(path), sidecar_json(br));
    }
    art.commit(out);
    for (Band b : d.omitted) out << "omitted " << band_name(b) << ": above Nyquist at fs=" << format_number(in.rec.fs) << "\n";
    for (Band b : d.capped)
      out << "capped " << band_name(b) << " upper edge at " << format_number(d.filters.at(b).design_high_hz) << " Hz\n";
    return kExitOk;
  }};
}

struct SpectrumArgs {
  InputArgs in;
  std::string method = "welch";
  double segment_seconds = 2.0;
  double overlap = 0.5;
  std::string epoch = "all";
};

Registered add_spectrum(CLI::App& app) {
  auto a = std::make_shared<SpectrumArgs>();
  auto* sub = app.add_subcommand("spectrum", "Power spectral density and band powers per channel");
  add_input_options(sub, a->in);
  sub->add_option("--method", a->method, "Estimator")->check(CLI::IsMember({"welch", "periodogram"}));
  sub->add_option("--segment-seconds", a->segment_seconds, "Welch segment length")->check(CLI::PositiveNumber);
  sub->add_option("--overlap", a->overlap, "Welch segment overlap")->check(CLI::Range(0.0, 0.95));
  sub->add_option("--epoch", a->epoch, "Epoch")->check(CLI::IsMember(kEpochs));
  return {sub, [a](std::ostream& out, [[maybe_unused]] std::ostream& err) {
    const Input in = load_input(a->in);
    const EpochView view = select_epoch(in.rec, a->epoch);
    const EegRecording& rec = view.rec;
    const std::string tag = a->epoch == "all" ? "" : a->epoch;
    const std::size_t n = rec.num_samples();
    const std::size_t seg = std::min<std::size_t>(n, static_cast<std::size_t>(std::lround(a->segment_seconds * rec.fs)));

    std::vector<SpectrumEstimate> spectra(rec.num_channels());
    parallel_for(rec.num_channels(), [&](std::size_t c) {
      const auto x = rec.data.column(c);
      spectra[c] = a->method == "welch" ? welch(x, rec.fs, seg, a->overlap) : periodogram(x, rec.fs);
    });

    ArtifactSet art;
    std::vector<std::string> header{"channel"};
    header.insert(header.end(), kBandNames.begin(), kBandNames.end());
    CsvWriter bp(header);
    for (std::size_t c = 0; c < rec.num_channels(); ++c) {
      CsvWriter w({"freq_hz", "power"});
      for (std::size_t k = 0; k < spectra[c].freqs_hz.size(); ++k) w.cell(spectra[c].freqs_hz[k]).cell(spectra[c].power[k]).end_row();
      art.add(in.out_dir / (join_name(in.stem, {"spectrum", tag, rec.channels[c]}) + ".csv"), w.str());
      bp.cell(rec.channels[c]);
      for (Band b : kAllBands) {
        double share = std::nan("");
        try {
          share = band_power(spectra[c], standard_band(b));
        } catch (const DomainError&) {
        }
        bp.cell(share);
      }
      bp.end_row();
    }
    art.add(in.out_dir / (join_name(in.stem, {"bandpower", tag}) + ".csv"), bp.str());
    art.commit(out);
    return kExitOk;
  }};
}

struct FitGpdArgs {
  InputArgs in;
  std::vector<std::string> channels;
  std::string band;
  std::string epoch = "all";
  double threshold_quantile = 0.95;
  std::size_t run_length = 0;
  CLI::Option* run_length_opt = nullptr;
  std::size_t grid_points = 20;
  std::uint64_t seed = 1;
};

Registered add_fit_gpd(CLI::App& app) {
  auto a = std::make_shared<FitGpdArgs>();
  auto* sub = app.add_subcommand("fit-gpd", "Peaks-over-threshold GPD fit with threshold diagnostics");
  add_input_options(sub, a->in);
  sub->add_option("--channel", a->channels, "Channel(s) to fit (default: all)");
  sub->add_option("--band", a->band, "Filter to one band first")->check(CLI::IsMember(kBandNames));
  sub->add_option("--epoch", a->epoch, "Epoch")->check(CLI::IsMember(kEpochs));
  sub->add_option("--threshold-quantile", a->threshold_quantile, "Threshold quantile")->check(CLI::Range(0.8, 0.999));
  a->run_length_opt = sub->add_option("--run-length", a->run_length, "Declustering run length in samples (default: fs/2)")
                          ->check(CLI::PositiveNumber);
  sub->add_option("--grid-points", a->grid_points, "Thresholds in the diagnostics grid")->check(CLI::Range(2, 500));
  sub->add_option("--seed", a->seed, "Optimiser restart seed");
  return {sub, [a](std::ostream& out, [[maybe_unused]] std::ostream& err) {
    const Input in = load_input(a->in);
    const auto channels = resolve_channels(in.rec, a->channels);
    const EpochView view = select_epoch(apply_band(in.rec, a->band), a->epoch);
    const std::size_t r = a->run_length_opt->count() > 0 ? a->run_length
                                                          : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(in.rec.fs / 2.0)));
    const std::string tag_epoch = a->epoch == "all" ? "" : a->epoch;
    GpdFitOptions gopt;
    gopt.seed = a->seed;

    struct Result {
      GpdFit fit;
      MeanResidualLife mrl;
      ParameterStability stab;
    };
    std::vector<Result> results(channels.size());
    parallel_for(channels.size(), [&](std::size_t k) {
      try {
        const auto x = view.rec.channel(channels[k]);
        results[k].fit = fit_channel_tail(x, a->threshold_quantile, r, gopt);
        const auto grid = quantile_grid(x, 0.8, 0.995, a->grid_points);
        results[k].mrl = mean_residual_life(x, grid);
        results[k].stab = parameter_stability(x, grid, gopt);
      } catch (...) {
        rethrow_with_context("channel '" + channels[k] + "'");
      }
    });

    ArtifactSet art;
    for (std::size_t k = 0; k < channels.size(); ++k) {
      const std::string base = join_name(in.stem, {"gpd", a->band, tag_epoch, channels[k]});
      const auto& res = results[k];
      art.add(in.out_dir / (base + ".json"),
              dump(gpd_json(res.fit, channels[k], a->band, a->epoch, a->threshold_quantile, r, in.rec.fs)));
      CsvWriter mrl({"threshold", "mean_excess", "ci_low", "ci_high", "n_exceed", "flagged"});
      for (std::size_t g = 0; g < res.mrl.grid.size(); ++g) {
        mrl.cell(res.mrl.grid[g]).cell(res.mrl.mean_excess[g]).cell(res.mrl.ci_low[g]).cell(res.mrl.ci_high[g]);
        mrl.cell(res.mrl.n_exceed[g]).cell(res.mrl.flagged[g] ? "1" : "0").end_row();
      }
      art.add(in.out_dir / (base + ".mrl.csv"), mrl.str());
      CsvWriter st({"threshold", "xi", "se_xi", "sigma_star", "se_sigma_star", "n_exceed", "flagged"});
      for (std::size_t g = 0; g < res.stab.grid.size(); ++g) {
        st.cell(res.stab.grid[g]).cell(res.stab.xi[g]).cell(res.stab.se_xi[g]).cell(res.stab.sigma_star[g]);
        st.cell(res.stab.se_sigma_star[g]).cell(res.stab.n_exceed[g]).cell(res.stab.flagged[g] ? "1" : "0").end_row();
      }
      art.add(in.out_dir / (base + ".stability.csv"), st.str());
      art.add(in.out_dir / (base + ".mrl.svg"),
              line_chart_svg("Mean residual life: " + channels[k], "threshold u", "mean excess", res.mrl.grid,
                             {{"mean excess", res.mrl.mean_excess}, {"95% low", res.mrl.ci_low}, {"95% high", res.mrl.ci_high}}));
      art.add(in.out_dir / (base + ".stability.svg"),
              line_chart_svg("Parameter stability: " + channels[k], "threshold u", "estimate", res.stab.grid,
                             {{"xi", res.stab.xi}, {"sigma*", res.stab.sigma_star}}));
    }
    art.commit(out);
    return kExitOk;
  }};
}

struct ChiArgs {
  InputArgs in;
  std::vector<double> levels{0.95};
  std::vector<std::string> channels;
  std::string band;
  std::string epoch = "all";
  std::size_t n_boot = 200;
  double block_length = 0.0;
  std::uint64_t seed = 1;
};

Registered add_chi(CLI::App& app) {
  auto a = std::make_shared<ChiArgs>();
  auto* sub = app.add_subcommand("chi", "Pairwise chi / chibar with stationary-bootstrap intervals");
  add_input_options(sub, a->in);
  sub->add_option("--u", a->levels, "Quantile level(s)")->check(CLI::Range(0.5, 0.9999));
  sub->add_option("--channel", a->channels, "Channel subset (default: all)");
  sub->add_option("--band", a->band, "Filter to one band first")->check(CLI::IsMember(kBandNames));
  sub->add_option("--epoch", a->epoch, "Epoch")->check(CLI::IsMember(kEpochs));
  sub->add_option("--n-boot", a->n_boot, "Bootstrap replicates (0 disables intervals)");
  sub->add_option("--block-length", a->block_length, "Mean bootstrap block length in samples (default: fs)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", a->seed, "Bootstrap seed");
  return {sub, [a](std::ostream& out, [[maybe_unused]] std::ostream& err) {
    const Input in = load_input(a->in);
    const auto channels = resolve_channels(in.rec, a->channels);
    const EpochView view = select_epoch(select_channels(apply_band(in.rec, a->band), channels), a->epoch);
    ChiOptions opt;
    opt.n_boot = a->n_boot;
    opt.mean_block_length = a->block_length;
    opt.seed = a->seed;
    const auto matrices = chi_matrices(view.rec, a->levels, opt);
    const std::string tag_epoch = a->epoch == "all" ? "" : a->epoch;
    ArtifactSet art;
    art.add(in.out_dir / (join_name(in.stem, {"chi", a->band, tag_epoch}) + ".csv"), chi_csv(matrices));
    for (const auto& m : matrices)
      art.add(in.out_dir / (join_name(in.stem, {"chi", a->band, tag_epoch, level_tag(m.u)}) + ".svg"),
              chi_heatmap_svg(m, "chi(u = " + format_number(m.u) + ")" + (tag_epoch.empty() ? "" : ", " + tag_epoch)));
    art.commit(out);
    return kExitOk;
  }};
}

struct HtArgs {
  InputArgs in;
  std::string cond_channel;
  std::vector<std::string> channels;
  std::string band;
  std::string epoch = "all";
  double quantile = 0.95;
  double margin_quantile = 0.95;
  std::uint64_t seed = 1;
  // ht-sim only
  double level = 0.99;
  std::size_t n_sim = 10000;
};

void add_ht_options(CLI::App* sub, HtArgs& a) {
  add_input_options(sub, a.in);
  sub->add_option("--cond-channel", a.cond_channel, "Conditioning (reference) channel")->required();
  sub->add_option("--channel", a.channels, "Dependent channel(s) (default: all others)");
  sub->add_option("--band", a.band, "Filter to one band first")->check(CLI::IsMember(kBandNames));
  sub->add_option("--epoch", a.epoch, "Epoch")->check(CLI::IsMember(kEpochs));
  sub->add_option("--quantile", a.quantile, "Conditioning quantile on the Laplace scale")->check(CLI::Range(0.9, 0.999));
  sub->add_option("--margin-quantile", a.margin_quantile, "Threshold quantile of the marginal GPD tails")
      ->check(CLI::Range(0.8, 0.999));
}

std::vector<std::string> dependents(const EegRecording& rec, const HtArgs& a) {
  if (!a.channels.empty()) return a.channels;
  std::vector<std::string> deps;
  for (const auto& c : rec.channels)
    if (c != a.cond_channel) deps.push_back(c);
  return deps;
}

Registered add_ht_fit(CLI::App& app) {
  auto a = std::make_shared<HtArgs>();
  auto* sub = app.add_subcommand("ht-fit", "Conditional extremes fit given a large reference channel");
  add_ht_options(sub, *a);
  sub->add_option("--seed", a->seed, "Marginal fit restart seed");
  return {sub, [a](std::ostream& out, [[maybe_unused]] std::ostream& err) {
    const Input in = load_input(a->in);
    const EpochView view = select_epoch(apply_band(in.rec, a->band), a->epoch);
    const HtBundle b = fit_ht_bundle(view, a->cond_channel, dependents(view.rec, *a), a->quantile, a->margin_quantile, a->seed);
    const std::string base = join_name(in.stem, {"ht", a->band, a->epoch == "all" ? "" : a->epoch});
    ArtifactSet art;
    art.add(in.out_dir / (base + ".json"), dump(ht_json(b, a->quantile, a->margin_quantile, a->epoch, a->band)));
    art.add(in.out_dir / (base + ".residuals.csv"), ht_residuals_csv(b));
    art.commit(out);
    return kExitOk;
  }};
}

Registered add_ht_sim(CLI::App& app) {
  auto a = std::make_shared<HtArgs>();
  auto* sub = app.add_subcommand("ht-sim", "Fit, then simulate dependent channels beyond a reference level");
  add_ht_options(sub, *a);
  sub->add_option("--level", a->level, "Conditioning level (quantile) to simulate beyond")->check(CLI::Range(0.9, 0.9999));
  sub->add_option("--n", a->n_sim, "Number of simulations")->check(CLI::PositiveNumber);
  sub->add_option("--seed", a->seed, "Simulation seed");
  return {sub, [a](std::ostream& out, [[maybe_unused]] std::ostream& err) {
    if (a->level < a->quantile) throw UsageError("--level must be at least --quantile");
    const Input in = load_input(a->in);
    const EpochView view = select_epoch(apply_band(in.rec, a->band), a->epoch);
    const HtBundle b = fit_ht_bundle(view, a->cond_channel, dependents(view.rec, *a), a->quantile, a->margin_quantile, a->seed);
    const auto sample = simulate_conditional(b.fits, a->level, a->n_sim, a->seed, b.margins);
    const std::string base = join_name(in.stem, {"htsim", a->band, a->epoch == "all" ? "" : a->epoch});
    ArtifactSet art;
    art.add(in.out_dir / (base + ".draws.csv"), sim_draws_csv(sample));
    art.add(in.out_dir / (base + ".summary.csv"), sim_summary_csv(conditional_summary(sample)));
    art.commit(out);
    return kExitOk;
  }};
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  InputArgs in;
  std::string cond_channel;
  std::vector<double> levels{0.95};
  std::size_t n_boot = 200;
  double threshold_quantile = 0.95;
  std::size_t run_length = 0;
  CLI::Option* run_length_opt = nullptr;
  double quantile = 0.95;
  double margin_quantile = 0.95;
  double level = 0.99;
  std::size_t n_sim = 10000;
  int order = 4;
  std::uint64_t seed = 1;
};

class Stage {
 public:
  Stage(std::string name, json params) : name_(std::move(name)), params_(std::move(params)) {}

  /// Runs `body`; its artifacts are committed only if it completes.
  bool run(const fs::path& dir, std::ostream& out, std::ostream& err,
           const std::function<void(std::vector<std::pair<std::string, std::string>>&)>& body) {
    std::vector<std::pair<std::string, std::string>> files;
    try {
      body(files);
      ArtifactSet art;
      for (auto& [name, content] : files) {
        art.add(dir / name, std::move(content));
        outputs_.push_back(name);
      }
      art.commit(out);
      status_ = "ok";
    } catch (const std::exception& e) {
      outputs_.clear();
      status_ = "failed";
      error_ = e.what();
      err << "eegx report: stage " << name_ << " failed: " << e.what() << "\n";
    }
    return status_ == "ok";
  }

  json to_json() const {
    json j;
    j["name"] = name_;
    j["params"] = params_;
    j["outputs"] = outputs_;
    j["status"] = status_;
    if (!error_.empty()) j["error"] = error_;
    return j;
  }

 private:
  std::string name_;
  json params_;
  std::vector<std::string> outputs_;
  std::string status_ = "skipped";
  std::string error_;
};

Registered add_report(CLI::App& app) {
  auto a = std::make_shared<ReportArgs>();
  auto* sub = app.add_subcommand("report", "Run the full pipeline into one directory with a manifest");
  add_input_options(sub, a->in);
  sub->add_option("--cond-channel", a->cond_channel, "Reference channel (default: T3 if present, else the first)");
  sub->add_option("--u", a->levels, "chi quantile level(s)")->check(CLI::Range(0.5, 0.9999));
  sub->add_option("--n-boot", a->n_boot, "chi bootstrap replicates");
  sub->add_option("--threshold-quantile", a->threshold_quantile, "GPD threshold quantile")->check(CLI::Range(0.8, 0.999));
  a->run_length_opt = sub->add_option("--run-length", a->run_length, "Declustering run length (default: fs/2)")
                          ->check(CLI::PositiveNumber);
  sub->add_option("--quantile", a->quantile, "Conditioning quantile")->check(CLI::Range(0.9, 0.999));
  sub->add_option("--margin-quantile", a->margin_quantile, "Marginal GPD threshold quantile")->check(CLI::Range(0.8, 0.999));
  sub->add_option("--level", a->level, "Simulation level")->check(CLI::Range(0.9, 0.9999));
  sub->add_option("--n", a->n_sim, "Simulations")->check(CLI::PositiveNumber);
  sub->add_option("--order", a->order, "Band-pass order")->check(CLI::IsMember({2, 4, 6, 8}));
  sub->add_option("--seed", a->seed, "Seed for every randomized stage");

  return {sub, [a](std::ostream& out, std::ostream& err) -> int {
    if (a->level < a->quantile) throw UsageError("--level must be at least --quantile");
    const Input in = load_input(a->in);
    const EegRecording& rec = in.rec;
    if (!rec.onset_index) throw UsageError("report needs an onset (--onset, --onset-seconds or sidecar onset_index)");
    const auto epochs = split_at_onset(rec);
    const std::string cond = !a->cond_channel.empty() ? a->cond_channel
                             : std::find(rec.channels.begin(), rec.channels.end(), "T3") != rec.channels.end()
                                 ? "T3"
                                 : rec.channels.front();
    rec.channel_index(cond);
    const std::size_t r = a->run_length_opt->count() > 0 ? a->run_length
                                                         : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(rec.fs / 2.0)));
    const fs::path dir = a->in.out_dir.empty() ? fs::path(in.stem + "_report") : fs::path(a->in.out_dir);
    std::vector<Stage> stages;

    // decompose
    BandDecomposition bands;
    {
      json p;
      p["order"] = a->order;
      p["detrend"] = "linear";
      p["filter"] = "butterworth zero-phase";
      Stage& s = stages.emplace_back("decompose", p);
      s.run(dir, out, err, [&](auto& files) {
        bands = decompose_bands(rec, a->order);
        for (const auto& [band, m] : bands.bands) {
          const EegRecording br = bands.band_recording(band, rec);
          const std::string name = join_name(in.stem, {std::string(band_name(band))}) + ".csv";
          files.emplace_back(name, serialize_recording(br));
          files.emplace_back(sidecar_path(name).string(), sidecar_json(br));
        }
      });
    }

    // per-band GPD fits for both epochs
    {
      json p;
      p["threshold_quantile"] = a->threshold_quantile;
      p["run_length"] = r;
      p["epochs"] = {"pre", "post"};
      p["seed"] = a->seed;
      Stage& s = stages.emplace_back("fit-gpd", p);
      s.run(dir, out, err, [&](auto& files) {
        if (bands.bands.empty()) throw Error("no band decomposition available");
        struct Job {
          Band band;
          std::string epoch;
          std::size_t channel;
        };
        std::vector<Job> jobs;
        for (const auto& [band, m] : bands.bands)
          for (const std::string epoch : {"pre", "post"})
            for (std::size_t c = 0; c < rec.num_channels(); ++c) jobs.push_back({band, epoch, c});
        std::vector<std::optional<GpdFit>> fits(jobs.size());
        std::vector<std::string> failures(jobs.size());
        GpdFitOptions gopt;
        gopt.seed = a->seed;
        const std::size_t onset = *rec.onset_index;
        parallel_for(jobs.size(), [&](std::size_t k) {
          const Matrix& m = bands.bands.at(jobs[k].band);
          const auto col = m.column(jobs[k].channel);
          const auto first = jobs[k].epoch == "pre" ? col.begin() : col.begin() + static_cast<std::ptrdiff_t>(onset);
          const auto last = jobs[k].epoch == "pre" ? col.begin() + static_cast<std::ptrdiff_t>(onset) : col.end();
          try {
            fits[k] = fit_channel_tail(std::vector<double>(first, last), a->threshold_quantile, r, gopt);
          } catch (const std::exception& e) {
            failures[k] = e.what();
          }
        });
        CsvWriter w({"band", "epoch", "channel", "u", "sigma", "xi", "zeta_u", "n_exceed", "se_sigma", "se_xi", "nll",
                     "on_boundary", "status"});
        json all = json::array();
        for (std::size_t k = 0; k < jobs.size(); ++k) {
          const std::string band(band_name(jobs[k].band));
          const std::string& ch = rec.channels[jobs[k].channel];
          w.cell(band).cell(jobs[k].epoch).cell(ch);
          if (fits[k]) {
            const GpdFit& f = *fits[k];
            w.cell(f.threshold_u).cell(f.sigma).cell(f.xi).cell(f.zeta_u).cell(f.n_exceed).cell(f.se_sigma).cell(f.se_xi);
            w.cell(f.nll).cell(f.on_boundary ? "1" : "0").cell("ok");
            all.push_back(gpd_json(f, ch, band, jobs[k].epoch, a->threshold_quantile, r, rec.fs));
          } else {
            const double nan = std::nan("");
            w.cell(nan).cell(nan).cell(nan).cell(nan).cell(std::size_t{0}).cell(nan).cell(nan).cell(nan).cell("0");
            std::string msg = failures[k];
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            w.cell("failed: " + msg);
          }
          w.end_row();
        }
        files.emplace_back(join_name(in.stem, {"gpd"}) + ".csv", w.str());
        files.emplace_back(join_name(in.stem, {"gpd"}) + ".json", dump(all));
      });
    }

    // chi per epoch
    std::map<std::string, std::vector<ChiMatrix>> chi_by_epoch;
    for (const std::string epoch : {"pre", "post"}) {
      json p;
      p["epoch"] = epoch;
      p["u"] = a->levels;
      p["n_boot"] = a->n_boot;
      p["mean_block_length"] = rec.fs;
      p["seed"] = a->seed;
      Stage& s = stages.emplace_back("chi-" + epoch, p);
      s.run(dir, out, err, [&](auto& files) {
        ChiOptions opt;
        opt.n_boot = a->n_boot;
        opt.seed = a->seed;
        const auto& er = epoch == "pre" ? epochs.pre : epochs.post;
        auto matrices = chi_matrices(er, a->levels, opt);
        files.emplace_back(join_name(in.stem, {"chi", epoch}) + ".csv", chi_csv(matrices));
        for (const auto& m : matrices)
          files.emplace_back(join_name(in.stem, {"chi", epoch, level_tag(m.u)}) + ".svg",
                             chi_heatmap_svg(m, "chi(u = " + format_number(m.u) + "), " + epoch));
        chi_by_epoch[epoch] = std::move(matrices);
      });
    }

    // HT fits per epoch
    std::map<std::string, HtBundle> ht_by_epoch;
    std::vector<std::string> deps;
    for (const auto& c : rec.channels)
      if (c != cond) deps.push_back(c);
    for (const std::string epoch : {"pre", "post"}) {
      json p;
      p["epoch"] = epoch;
      p["cond_channel"] = cond;
      p["quantile"] = a->quantile;
      p["margin_quantile"] = a->margin_quantile;
      p["seed"] = a->seed;
      Stage& s = stages.emplace_back("ht-fit-" + epoch, p);
      s.run(dir, out, err, [&](auto& files) {
        const EpochView view = epoch == "pre" ? EpochView{epochs.pre, 0} : EpochView{epochs.post, *rec.onset_index};
        HtBundle b = fit_ht_bundle(view, cond, deps, a->quantile, a->margin_quantile, a->seed);
        files.emplace_back(join_name(in.stem, {"ht", epoch}) + ".json", dump(ht_json(b, a->quantile, a->margin_quantile, epoch, "")));
        files.emplace_back(join_name(in.stem, {"ht", epoch}) + ".residuals.csv", ht_residuals_csv(b));
        ht_by_epoch[epoch] = std::move(b);
      });
    }

    // simulation beyond the reference level, post-onset fit
    {
      json p;
      p["epoch"] = "post";
      p["cond_channel"] = cond;
      p["level"] = a->level;
      p["n"] = a->n_sim;
      p["seed"] = a->seed;
      Stage& s = stages.emplace_back("ht-sim", p);
      s.run(dir, out, err, [&](auto& files) {
        const auto it = ht_by_epoch.find("post");
        if (it == ht_by_epoch.end()) throw Error("post-onset conditional fit unavailable");
        const auto sample = simulate_conditional(it->second.fits, a->level, a->n_sim, a->seed, it->second.margins);
        files.emplace_back(join_name(in.stem, {"htsim", "post"}) + ".draws.csv", sim_draws_csv(sample));
        files.emplace_back(join_name(in.stem, {"htsim", "post"}) + ".summary.csv", sim_summary_csv(conditional_summary(sample)));
      });
    }

    // pre/post contrast for the reference pairings
    {
      json p;
      p["cond_channel"] = cond;
      p["u"] = a->levels.front();
      Stage& s = stages.emplace_back("contrast", p);
      s.run(dir, out, err, [&](auto& files) {
        if (chi_by_epoch.size() != 2 || ht_by_epoch.size() != 2) throw Error("chi or conditional fits missing for an epoch");
        const std::size_t ci = rec.channel_index(cond);
        CsvWriter w({"channel", "chi_pre", "chi_post", "alpha_pre", "alpha_post", "beta_pre", "beta_post"});
        for (std::size_t k = 0; k < deps.size(); ++k) {
          const std::size_t cj = rec.channel_index(deps[k]);
          const auto& hp = ht_by_epoch.at("pre").fits[k];
          const auto& hq = ht_by_epoch.at("post").fits[k];
          w.cell(deps[k]).cell(chi_by_epoch.at("pre").front().at(ci, cj).chi).cell(chi_by_epoch.at("post").front().at(ci, cj).chi);
          w.cell(hp.alpha).cell(hq.alpha).cell(hp.beta).cell(hq.beta).end_row();
        }
        files.emplace_back(join_name(in.stem, {"contrast"}) + ".csv", w.str());
      });
    }

    json manifest;
    manifest["version"] = "1";
    json inputs;
    inputs["path"] = a->in.input;
    inputs["fs"] = rec.fs;
    inputs["onset_index"] = *rec.onset_index;
    inputs["samples"] = rec.num_samples();
    inputs["channels"] = rec.channels;
    manifest["inputs"] = inputs;
    manifest["stages"] = json::array();
    bool failed = false;
    for (const auto& s : stages) {
      manifest["stages"].push_back(s.to_json());
      failed = failed || s.to_json()["status"] != "ok";
    }
    ArtifactSet art;
    art.add(dir / "manifest.json", dump(manifest));
    art.commit(out);
    return failed ? kExitFailure : kExitOk;
  }};
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const DataError*>(&e) ||
      dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const UsageError*>(&e) ||
      dynamic_cast<const LookupError*>(&e))
    return kExitUsage;
  return kExitFailure;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Extreme-value analysis of multichannel EEG recordings", "eegx"};
  app.require_subcommand(1);
  const std::vector<Registered> actions{add_simulate(app), add_decompose(app), add_spectrum(app), add_fit_gpd(app),
                                        add_chi(app),      add_ht_fit(app),    add_ht_sim(app),   add_report(app)};

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (const auto& [sub, action] : actions) {
    if (!sub->parsed()) continue;
    try {
      return action(out, err);
    } catch (const std::exception& e) {
      err << "eegx " << sub->get_name() << ": " << e.what() << "\n";
      return exit_code_for(e);
    }
  }
  return kExitUsage;
}

}  // namespace eegx::cli
