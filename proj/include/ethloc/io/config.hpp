#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ethloc/ansatz.hpp"
#include "ethloc/error.hpp"
#include "ethloc/experiments.hpp"
#include "ethloc/hamiltonians.hpp"

namespace ethloc::io {

enum class CachePolicy { use, recompute, forbid };

inline CachePolicy parse_cache_policy(const std::string& s) {
  if (s == "use") return CachePolicy::use;
  if (s == "recompute") return CachePolicy::recompute;
  if (s == "forbid" || s == "forbid-compute") return CachePolicy::forbid;
  throw ConfigError("cache policy must be one of use, recompute, forbid (got '" + s + "')");
}

inline const char* to_string(CachePolicy p) {
  switch (p) {
    case CachePolicy::use: return "use";
    case CachePolicy::recompute: return "recompute";
    case CachePolicy::forbid: return "forbid";
  }
  return "use";
}

enum class Experiment { none, fig1, fig2, fig3, appB };

inline Experiment parse_experiment(const std::string& s) {
  if (s.empty() || s == "none") return Experiment::none;
  if (s == "fig1" || s == "fig1_coeffs") return Experiment::fig1;
  if (s == "fig2" || s == "fig2_scan_LA") return Experiment::fig2;
  if (s == "fig3" || s == "fig3_scan_E") return Experiment::fig3;
  if (s == "appB" || s == "appB_banding") return Experiment::appB;
  throw ConfigError("unknown experiment '" + s + "' (expected fig1, fig2, fig3 or appB)");
}

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::none: return "none";
    case Experiment::fig1: return "fig1";
    case Experiment::fig2: return "fig2";
    case Experiment::fig3: return "fig3";
    case Experiment::appB: return "appB";
  }
  return "none";
}

struct RunConfig {
  Experiment experiment = Experiment::none;
  SpinChainParams chain;
  RandomSystemParams random;
  std::vector<int> cuts;               // L_A values
  std::vector<double> ebar_fractions;  // Ē = fraction * E_min
  int fig1_states = 7;

  int ops = 250;
  std::uint64_t seed = 1;

  double ebar_halfwidth = 0.5;
  double omega_bin_width = 0.015;
  bool rescale_bin_width = true;

  double center_fraction = 0.5;
  int dos_bins = 64;
  std::vector<AnsatzKind> kinds;

  std::string out_dir = "ethloc-out";
  std::string cache_dir = ".ethloc-cache";
  CachePolicy cache = CachePolicy::use;
  int threads = 1;
  bool plot = false;

  /// Fills the per-experiment defaults for anything not set explicitly.
  void apply_experiment_defaults() {
    if (cuts.empty()) {
      if (experiment == Experiment::fig2)
        cuts = {1, 3, 5, 7};
      else
        cuts = {3};
    }
    if (ebar_fractions.empty()) {
      if (experiment == Experiment::fig2)
        ebar_fractions = {0.0, 0.5};
      else if (experiment == Experiment::fig3)
        ebar_fractions = {0.0, 0.25, 0.5};
      else
        ebar_fractions = {0.0};
    }
    if (kinds.empty())
      kinds = {AnsatzKind::exp_decay_flat_A, AnsatzKind::smooth_interpolated, AnsatzKind::narrow_scrambling,
               AnsatzKind::small_A_narrow, AnsatzKind::mc_finite_width_flat_A};
  }

  void validate() const {
    chain.validate();
    if (experiment == Experiment::appB) random.validate();
    for (int c : cuts)
      if (experiment != Experiment::appB && (c < 1 || c >= chain.L)) {
        std::ostringstream os;
        os << "cuts: L_A = " << c << " must satisfy 1 <= L_A < L = " << chain.L;
        throw ConfigError(os.str());
      }
    for (double f : ebar_fractions)
      if (!(f >= 0.0 && f < 1.0)) throw ConfigError("ebar_fractions: values must lie in [0, 1)");
    if (fig1_states < 1) throw ConfigError("fig1_states must be >= 1");
    if (ops < 1) throw ConfigError("ensemble.count must be >= 1");
    if (!(ebar_halfwidth > 0.0)) throw ConfigError("binning.ebar_halfwidth must be positive");
    if (!(omega_bin_width > 0.0)) throw ConfigError("binning.omega_bin_width must be positive");
    if (!(center_fraction > 0.0 && center_fraction <= 1.0))
      throw ConfigError("scrambling.center_fraction must lie in (0, 1]");
    if (dos_bins < 4) throw ConfigError("ansatz.dos_bins must be >= 4");
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }
};

namespace detail {

inline std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.line < 0) return "";
  std::ostringstream os;
  os << " (line " << m.line + 1 << ")";
  return os.str();
}

inline void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& section) {
  if (!map.IsMap()) throw ConfigError("config: section '" + section + "' must be a mapping" + where(map));
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + (section.empty() ? key : section + "." + key) + "'" +
                        where(kv.first));
  }
}

template <class T>
void read(const YAML::Node& map, const char* key, T& out, const std::string& section) {
  const YAML::Node n = map[key];
  if (!n) return;
  try {
    out = n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config: '" + (section.empty() ? std::string(key) : section + "." + key) +
                      "' has the wrong type" + where(n));
  }
}

}  // namespace detail

/// Reads a YAML run configuration. Missing keys keep their defaults; unknown
/// keys are errors.
inline RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << origin << ": parse error at line " << e.mark.line + 1 << ", column " << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }
  RunConfig cfg;
  if (root.IsNull()) {
    cfg.apply_experiment_defaults();
    return cfg;
  }
  using detail::read;
  detail::check_keys(root,
                     {"experiment", "system", "random_system", "cuts", "ebar_fractions", "fig1_states", "ensemble",
                      "binning", "scrambling", "ansatz", "output", "cache", "threads"},
                     "");
  std::string exp;
  read(root, "experiment", exp, "");
  cfg.experiment = parse_experiment(exp);

  if (const auto s = root["system"]) {
    detail::check_keys(s, {"L", "J", "h_x", "h_z", "max_L"}, "system");
    read(s, "L", cfg.chain.L, "system");
    read(s, "J", cfg.chain.J, "system");
    read(s, "h_x", cfg.chain.h_x, "system");
    read(s, "h_z", cfg.chain.h_z, "system");
    read(s, "max_L", cfg.chain.max_L, "system");
  }
  if (const auto r = root["random_system"]) {
    detail::check_keys(r, {"L_A", "L_B", "L_I", "f", "seed", "a_scale", "max_qubits"}, "random_system");
    read(r, "L_A", cfg.random.L_A, "random_system");
    read(r, "L_B", cfg.random.L_B, "random_system");
    read(r, "L_I", cfg.random.L_I, "random_system");
    read(r, "f", cfg.random.f, "random_system");
    read(r, "seed", cfg.random.seed, "random_system");
    read(r, "a_scale", cfg.random.a_scale, "random_system");
    read(r, "max_qubits", cfg.random.max_qubits, "random_system");
  }
  read(root, "cuts", cfg.cuts, "");
  read(root, "ebar_fractions", cfg.ebar_fractions, "");
  read(root, "fig1_states", cfg.fig1_states, "");
  if (const auto e = root["ensemble"]) {
    detail::check_keys(e, {"count", "seed"}, "ensemble");
    read(e, "count", cfg.ops, "ensemble");
    read(e, "seed", cfg.seed, "ensemble");
  }
  if (const auto b = root["binning"]) {
    detail::check_keys(b, {"ebar_halfwidth", "omega_bin_width", "rescale_bin_width"}, "binning");
    read(b, "ebar_halfwidth", cfg.ebar_halfwidth, "binning");
    read(b, "omega_bin_width", cfg.omega_bin_width, "binning");
    read(b, "rescale_bin_width", cfg.rescale_bin_width, "binning");
  }
  if (const auto s = root["scrambling"]) {
    detail::check_keys(s, {"center_fraction"}, "scrambling");
    read(s, "center_fraction", cfg.center_fraction, "scrambling");
  }
  if (const auto a = root["ansatz"]) {
    detail::check_keys(a, {"kinds", "dos_bins"}, "ansatz");
    std::vector<std::string> names;
    read(a, "kinds", names, "ansatz");
    for (const auto& n : names) {
      const auto k = parse_ansatz_kind(n);
      if (!k) throw ConfigError("config: unknown ansatz kind '" + n + "'" + detail::where(a["kinds"]));
      cfg.kinds.push_back(*k);
    }
    read(a, "dos_bins", cfg.dos_bins, "ansatz");
  }
  if (const auto o = root["output"]) {
    detail::check_keys(o, {"dir", "plot"}, "output");
    read(o, "dir", cfg.out_dir, "output");
    read(o, "plot", cfg.plot, "output");
  }
  if (const auto c = root["cache"]) {
    detail::check_keys(c, {"policy", "dir"}, "cache");
    std::string pol;
    read(c, "policy", pol, "cache");
    if (!pol.empty()) cfg.cache = parse_cache_policy(pol);
    read(c, "dir", cfg.cache_dir, "cache");
  }
  read(root, "threads", cfg.threads, "");

  cfg.apply_experiment_defaults();
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

/// ETHLOC_OUT_DIR, when set and non-empty, replaces the configured output
/// directory.
inline void apply_environment(RunConfig& cfg) {
  if (const char* dir = std::getenv("ETHLOC_OUT_DIR"); dir && *dir) cfg.out_dir = dir;
}

}  // namespace ethloc::io
