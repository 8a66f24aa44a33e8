#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "ethloc/ansatz.hpp"
#include "ethloc/experiments.hpp"
#include "ethloc/hamiltonians.hpp"
#include "ethloc/io/cache.hpp"
#include "ethloc/io/config.hpp"
#include "ethloc/io/dataset.hpp"
#include "ethloc/io/svg.hpp"
#include "ethloc/scrambling.hpp"

namespace ethloc {

/// Spectral range of the L = 12, J = 1, h_x = 1.05, h_z = 0.5 chain, the
/// system the default ω bin width of 0.015 refers to.
inline constexpr double reference_spectral_range = 35.6540717;

inline double rescaled_bin_width(const io::RunConfig& cfg, double spectral_range) {
  return cfg.rescale_bin_width ? cfg.omega_bin_width * spectral_range / reference_spectral_range : cfg.omega_bin_width;
}

inline Spectrum chain_total_spectrum(const SpinChainParams& p, const io::SpectrumCache& cache) {
  p.validate();
  return cache.get_or_compute(io::chain_key(p), [&] { return eig_sym(build_spin_chain(p)); });
}

inline BipartiteSystem cached_random_system(const RandomSystemParams& p, const io::SpectrumCache& cache) {
  p.validate();
  const io::CacheKey key = io::random_key(p);
  if (cache.policy() != io::CachePolicy::recompute)
    if (auto s = cache.load(key)) return build_random_system(p, std::move(*s));
  if (cache.policy() == io::CachePolicy::forbid) throw cache.forbidden(key);
  BipartiteSystem sys = build_random_system(p);
  cache.store(sys.spec_t, key);
  return sys;
}

/// Indices of `count` states at the quantiles (k+1)/(count+1) of the spectrum.
inline std::vector<Index> quantile_states(Index dim, int count) {
  std::vector<Index> out;
  for (int k = 0; k < count; ++k) {
    const double q = static_cast<double>(k + 1) / static_cast<double>(count + 1);
    out.push_back(static_cast<Index>(std::llround(q * static_cast<double>(dim - 1))));
  }
  return out;
}

struct FigureResult {
  std::vector<std::filesystem::path> files;
  nlohmann::json manifest;
};

namespace detail {

inline std::string tag(const std::string& prefix, int v) { return prefix + std::to_string(v); }

inline void write_binned(io::CsvWriter& w, const BinnedStatistics& b) {
  for (const auto& x : b.bins)
    w.row({b.ebar_center, x.omega_mid, x.mean_sq, static_cast<long long>(x.count), x.std_err});
}

inline void write_predictions(io::CsvWriter& w, const std::vector<Prediction>& preds) {
  for (const auto& p : preds)
    for (const auto& pt : p.points)
      w.row({std::string(to_string(p.kind)), p.ebar, pt.omega, pt.f, pt.entropic_factor, pt.variance});
}

inline std::vector<double> bin_mids(const BinnedStatistics& b) {
  std::vector<double> out;
  for (const auto& x : b.bins) out.push_back(x.omega_mid);
  return out;
}

inline void plot_curve(const std::filesystem::path& path, const std::string& title, const BinnedStatistics& b,
                       const std::vector<Prediction>& preds) {
  std::vector<io::Series> series;
  io::Series measured{"measured", {}, {}, false};
  for (const auto& x : b.bins) {
    measured.x.push_back(x.omega_mid);
    measured.y.push_back(x.mean_sq);
  }
  series.push_back(std::move(measured));
  for (const auto& p : preds) {
    io::Series s{std::string(to_string(p.kind)), {}, {}, true};
    for (const auto& pt : p.points) {
      s.x.push_back(pt.omega);
      s.y.push_back(pt.variance);
    }
    series.push_back(std::move(s));
  }
  io::write_svg_plot(path, {title, "omega", "mean |O_ab|^2", true}, series);
}

inline nlohmann::json config_echo(const io::RunConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = io::to_string(cfg.experiment);
  j["system"] = {{"L", cfg.chain.L}, {"J", cfg.chain.J}, {"h_x", cfg.chain.h_x}, {"h_z", cfg.chain.h_z}};
  j["random_system"] = {{"L_A", cfg.random.L_A}, {"L_B", cfg.random.L_B}, {"L_I", cfg.random.L_I},
                        {"f", cfg.random.f},     {"seed", cfg.random.seed}, {"a_scale", cfg.random.a_scale}};
  j["cuts"] = cfg.cuts;
  j["ebar_fractions"] = cfg.ebar_fractions;
  j["ensemble"] = {{"count", cfg.ops}, {"seed", cfg.seed}};
  j["binning"] = {{"ebar_halfwidth", cfg.ebar_halfwidth},
                  {"omega_bin_width", cfg.omega_bin_width},
                  {"rescale_bin_width", cfg.rescale_bin_width}};
  std::vector<std::string> kinds;
  for (auto k : cfg.kinds) kinds.emplace_back(to_string(k));
  j["ansatz"] = {{"kinds", kinds}, {"dos_bins", cfg.dos_bins}};
  j["scrambling"] = {{"center_fraction", cfg.center_fraction}};
  j["cache"] = {{"policy", io::to_string(cfg.cache)}, {"dir", cfg.cache_dir}};
  j["threads"] = cfg.threads;
  return j;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Binned ensemble statistics and ansatz curves for one system and one Ē.
struct CurveResult {
  BinnedStatistics measured;
  std::vector<Prediction> predictions;
};

inline CurveResult measure_curve(const BipartiteSystem& sys, double sigma_s, double ebar, const io::RunConfig& cfg) {
  BinningParams bp;
  bp.ebar_center = ebar;
  bp.ebar_halfwidth = cfg.ebar_halfwidth;
  bp.omega_bin_width = rescaled_bin_width(cfg, sys.spec_t.range());
  OperatorEnsembleSpec ops{cfg.ops, sys.dim_a, true, cfg.seed};
  CurveResult out;
  out.measured = ensemble_offdiagonal(sys, ops, bp, cfg.threads);
  const AnsatzModel model = AnsatzModel::from_system(sys, sigma_s, TypicalOperator{1.0}, cfg.dos_bins);
  const auto omegas = detail::bin_mids(out.measured);
  for (AnsatzKind k : cfg.kinds) out.predictions.push_back(predict(model, k, ebar, omegas));
  return out;
}

inline FigureResult run_fig1(const io::RunConfig& cfg, const io::SpectrumCache& cache,
                             const std::filesystem::path& out) {
  FigureResult r;
  const int cut = cfg.cuts.front();
  const BipartiteSystem sys = decompose_chain(cfg.chain, cut, chain_total_spectrum(cfg.chain, cache));
  const ScramblingCoefficients co = compute_coefficients(sys);
  ProfileOptions po;
  po.center_fraction = cfg.center_fraction;
  const ScramblingProfile prof = profile(co, po);

  io::CsvWriter w(out / detail::tag("fig1_coeffs_LA", cut).append(".csv"), io::Schema::coeffs);
  std::vector<double> alphas;
  for (Index alpha : quantile_states(sys.dim(), cfg.fig1_states)) {
    alphas.push_back(co.energies_t(alpha));
    for (Index i = 0; i < co.dim_a; ++i)
      for (Index j = 0; j < co.dim_b; ++j)
        w.row({co.energies_t(alpha), co.energies_a(i) + co.energies_b(j), std::abs(co.at(alpha, i, j))});
  }
  w.close();
  r.files.push_back(out / detail::tag("fig1_coeffs_LA", cut).append(".csv"));

  const auto prof_path = out / detail::tag("fig1_profile_LA", cut).append(".csv");
  io::CsvWriter pw(prof_path, io::Schema::profile);
  for (std::size_t b = 0; b < prof.offsets.size(); ++b)
    if (prof.counts[b] > 0)
      pw.row({prof.offsets[b], prof.mean_sq[b], static_cast<long long>(prof.counts[b]), prof.h(prof.offsets[b])});
  pw.close();
  r.files.push_back(prof_path);

  r.manifest["L_A"] = cut;
  r.manifest["sigma_S"] = prof.sigma_s;
  r.manifest["mean_offset"] = prof.mean_offset;
  r.manifest["E_alpha"] = alphas;
  if (cfg.plot) {
    io::Series s{"mean c^2", {}, {}, false};
    for (std::size_t b = 0; b < prof.offsets.size(); ++b)
      if (prof.counts[b] > 0) {
        s.x.push_back(prof.offsets[b]);
        s.y.push_back(prof.mean_sq[b]);
      }
    io::write_svg_plot(out / detail::tag("fig1_profile_LA", cut).append(".svg"),
                       {"scrambling profile", "E_alpha - E_i - E_j", "mean c^2", true}, {s});
  }
  return r;
}

/// Shared body of fig2 (L_A scan) and fig3 (Ē scan).
inline FigureResult run_scan(const io::RunConfig& cfg, const io::SpectrumCache& cache,
                             const std::filesystem::path& out, const std::string& prefix) {
  FigureResult r;
  const Spectrum total = chain_total_spectrum(cfg.chain, cache);
  const double e_min = total.min();
  r.manifest["E_min"] = e_min;
  for (int cut : cfg.cuts) {
    const auto t0 = std::chrono::steady_clock::now();
    const BipartiteSystem sys = decompose_chain(cfg.chain, cut, total);
    ProfileOptions po;
    po.center_fraction = cfg.center_fraction;
    const double sigma_s = profile(compute_coefficients(sys), po).sigma_s;
    const std::string stem = prefix + "_LA" + std::to_string(cut);
    io::CsvWriter bw(out / (stem + "_binned.csv"), io::Schema::binned);
    io::CsvWriter pw(out / (stem + "_prediction.csv"), io::Schema::prediction);
    nlohmann::json entry{{"L_A", cut}, {"sigma_S", sigma_s}, {"sigma_A", sys.spec_a.range()}};
    int idx = 0;
    for (double frac : cfg.ebar_fractions) {
      const double ebar = frac * e_min;
      const CurveResult c = measure_curve(sys, sigma_s, ebar, cfg);
      detail::write_binned(bw, c.measured);
      detail::write_predictions(pw, c.predictions);
      entry["Ebar"].push_back(ebar);
      entry["omega_bin_width"] = c.measured.omega_bin_width;
      if (cfg.plot)
        detail::plot_curve(out / (stem + "_E" + std::to_string(idx) + ".svg"),
                           "L_A=" + std::to_string(cut) + " Ebar=" + io::format_real(ebar), c.measured,
                           c.predictions);
      ++idx;
    }
    bw.close();
    pw.close();
    r.files.push_back(out / (stem + "_binned.csv"));
    r.files.push_back(out / (stem + "_prediction.csv"));
    entry["seconds"] = detail::seconds_since(t0);
    r.manifest["cuts"].push_back(entry);
  }
  return r;
}

inline FigureResult run_appb(const io::RunConfig& cfg, const io::SpectrumCache& cache,
                             const std::filesystem::path& out) {
  FigureResult r;
  const BipartiteSystem sys = cached_random_system(cfg.random, cache);
  ProfileOptions po;
  po.center_fraction = cfg.center_fraction;
  const double sigma_s = profile(compute_coefficients(sys), po).sigma_s;
  const auto gaps = spectral_gaps(sys.spec_a.values);

  io::CsvWriter gw(out / "appB_gaps.csv", io::Schema::gaps);
  for (Index i = 0; i < sys.dim_a; ++i)
    for (Index j = i + 1; j < sys.dim_a; ++j)
      gw.row({static_cast<long long>(i), static_cast<long long>(j),
              0.5 * (sys.spec_a.values(j) - sys.spec_a.values(i))});
  gw.close();
  r.files.push_back(out / "appB_gaps.csv");

  io::CsvWriter bw(out / "appB_binned.csv", io::Schema::binned);
  io::CsvWriter pw(out / "appB_prediction.csv", io::Schema::prediction);
  io::CsvWriter kw(out / "appB_peaks.csv", io::Schema::peaks);
  io::CsvWriter tw(out / "appB_elements.csv", io::Schema::banding);
  const Matrix first = matrix_elements_total_basis(sys, sample_local_operator({cfg.ops, sys.dim_a, true, cfg.seed}, 0));
  const Vector& e = sys.spec_t.values;
  nlohmann::json windows = nlohmann::json::array();
  int idx = 0;
  for (double frac : cfg.ebar_fractions) {
    const double ebar = frac * e.minCoeff();
    const CurveResult c = measure_curve(sys, sigma_s, ebar, cfg);
    detail::write_binned(bw, c.measured);
    detail::write_predictions(pw, c.predictions);
    // H_A cannot imprint structure beyond its largest gap
    const double omega_max = gaps.empty() ? 0.0 : gaps.back() + 2.0 * sigma_s;
    const BandReport rep = detect_bands(c.measured, gaps, sigma_s, omega_max);
    for (const auto& p : rep.peaks)
      kw.row({p.omega, p.mean_sq, p.prominence, p.nearest_gap, static_cast<long long>(p.matched)});
    for (Index b = 0; b < e.size(); ++b)
      for (Index a = 0; a < b; ++a) {
        const double eb = 0.5 * (e(a) + e(b));
        if (eb >= ebar - cfg.ebar_halfwidth && eb <= ebar + cfg.ebar_halfwidth)
          tw.row({e(a), e(b), std::abs(first(a, b))});
      }
    windows.push_back({{"Ebar", ebar},
                       {"peaks", rep.peaks.size()},
                       {"matched", rep.matched},
                       {"matched_fraction", rep.matched_fraction()},
                       {"omega_bin_width", c.measured.omega_bin_width}});
    if (cfg.plot)
      detail::plot_curve(out / ("appB_E" + std::to_string(idx) + ".svg"), "banding Ebar=" + io::format_real(ebar),
                         c.measured, c.predictions);
    ++idx;
  }
  for (auto* w : {&bw, &pw, &kw, &tw}) w->close();
  for (const char* f : {"appB_binned.csv", "appB_prediction.csv", "appB_peaks.csv", "appB_elements.csv"})
    r.files.push_back(out / f);
  r.manifest["sigma_S"] = sigma_s;
  r.manifest["interaction_norm"] = sys.interaction_norm;
  r.manifest["min_gap_omega"] = gaps.empty() ? 0.0 : gaps.front();
  r.manifest["max_gap_omega"] = gaps.empty() ? 0.0 : gaps.back();
  r.manifest["windows"] = windows;
  return r;
}

/// Runs one figure protocol, writing CSV datasets and manifest.json into
/// cfg.out_dir.
inline FigureResult run_figure(io::RunConfig cfg) {
  if (cfg.experiment == io::Experiment::none) throw ConfigError("run_figure: no experiment selected");
  cfg.apply_experiment_defaults();
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::filesystem::path out = cfg.out_dir;
  std::filesystem::create_directories(out);
  const io::SpectrumCache cache(cfg.cache_dir, cfg.cache);
  FigureResult r;
  switch (cfg.experiment) {
    case io::Experiment::fig1: r = run_fig1(cfg, cache, out); break;
    case io::Experiment::fig2: r = run_scan(cfg, cache, out, "fig2"); break;
    case io::Experiment::fig3: r = run_scan(cfg, cache, out, "fig3"); break;
    case io::Experiment::appB: r = run_appb(cfg, cache, out); break;
    case io::Experiment::none: break;
  }
  nlohmann::json manifest;
  manifest["config"] = detail::config_echo(cfg);
  manifest["results"] = r.manifest;
  manifest["seconds"] = detail::seconds_since(t0);
  std::vector<std::string> names;
  for (const auto& f : r.files) names.push_back(f.filename().string());
  manifest["files"] = names;
  io::write_json(out / "manifest.json", manifest);
  r.files.push_back(out / "manifest.json");
  r.manifest = std::move(manifest);
  return r;
}

}  // namespace ethloc
