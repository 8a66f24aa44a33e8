#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ethloc/ethloc.hpp"
#include "ethloc/figures.hpp"
#include "ethloc/io/cache.hpp"
#include "ethloc/io/config.hpp"
#include "ethloc/io/dataset.hpp"

namespace fs = std::filesystem;
using namespace ethloc;

namespace {

enum Exit { ok = 0, config_error = 2, compute_error = 3, cache_error = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
  std::string cache;
  bool plot = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "YAML run configuration")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "ensemble seed (also the random-system seed)");
  app->add_option("--out", c.out, "output directory (overrides ETHLOC_OUT_DIR and the config)");
  app->add_option("--threads", c.threads, "worker threads for the operator ensemble");
  app->add_option("--cache", c.cache, "eigendecomposition cache policy")
      ->check(CLI::IsMember({"use", "recompute", "forbid"}));
  app->add_flag("--plot", c.plot, "also write SVG plots");
}

io::RunConfig load(const Common& c) {
  io::RunConfig cfg = c.config.empty() ? io::parse_config_text("") : io::parse_config(c.config);
  io::apply_environment(cfg);
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.random.seed = *c.seed;
  }
  if (c.threads) cfg.threads = *c.threads;
  if (!c.cache.empty()) cfg.cache = io::parse_cache_policy(c.cache);
  if (c.plot) cfg.plot = true;
  return cfg;
}

void validate(io::RunConfig& cfg) {
  cfg.apply_experiment_defaults();
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

/// Pauli string such as "XIZ" acting on as many qubits as characters.
Matrix pauli_string(const std::string& s) {
  if (s.empty()) throw InvalidInput("empty Pauli string");
  Matrix out = Matrix::Ones(1, 1);
  int ys = 0;
  for (char ch : s) {
    Matrix p(2, 2);
    switch (ch) {
      case 'I': p << 1, 0, 0, 1; break;
      case 'X': p << 0, 1, 1, 0; break;
      case 'Z': p << 1, 0, 0, -1; break;
      case 'Y': p << 0, -1, 1, 0; ++ys; break;  // -iY, real; fixed up below
      default: throw InvalidInput(std::string("unknown Pauli letter '") + ch + "' (use I, X, Y, Z)");
    }
    out = kron(out, p);
  }
  if (ys % 2 != 0) throw InvalidInput("Pauli strings with an odd number of Y factors are complex and not supported");
  // (-iY)^{⊗2k} = (-1)^k Y^{⊗2k}
  if ((ys / 2) % 2 != 0) out = -out;
  return out;
}

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open matrix file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ls(line);
    std::vector<double> r;
    double v;
    while (ls >> v) r.push_back(v);
    if (!r.empty()) rows.push_back(std::move(r));
  }
  const auto n = static_cast<Index>(rows.size());
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw InvalidInput("matrix file '" + path + "' is not square");
    for (Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

void print_files(const std::vector<fs::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Eigenstate thermalization from locality: systems, scrambling and ansatz predictions"};
  app.require_subcommand(1);

  Common common;
  std::optional<int> L;

  auto* sc = app.add_subcommand("spin-chain", "diagonalize the spin chain and write its spectrum");
  add_common(sc, common);
  sc->add_option("--L", L, "number of sites");

  auto* rs = app.add_subcommand("random-system", "build a random bipartite system and report its scrambling width");
  add_common(rs, common);

  int coeff_cut = 0;
  auto* co = app.add_subcommand("coeffs", "write scrambling coefficients for states across the spectrum");
  add_common(co, common);
  co->add_option("--cut", coeff_cut, "L_A, the number of sites in factor A");

  auto* pr = app.add_subcommand("predict", "evaluate ansatz predictions on an omega grid");
  add_common(pr, common);
  int pred_cut = 0;
  double ebar = 0.0, omega_max = 0.0, omega_step = 0.0;
  std::optional<double> sigma_s_arg;
  std::vector<std::string> kind_names;
  pr->add_option("--cut", pred_cut, "L_A");
  pr->add_option("--Ebar", ebar, "mean energy");
  pr->add_option("--omega-max", omega_max, "largest omega (default: spectral range of H_A)");
  pr->add_option("--omega-step", omega_step, "omega spacing (default: the binning width)");
  pr->add_option("--sigma-s", sigma_s_arg, "scrambling width (default: measured)");
  pr->add_option("--kind", kind_names, "ansatz kind(s)");

  auto* lo = app.add_subcommand("localize", "localizability of an operator");
  std::string pauli, matrix_path;
  double tol = 1e-9;
  std::string lo_out;
  auto* po = lo->add_option("--pauli", pauli, "Pauli string, e.g. XIZ");
  auto* mo = lo->add_option("--matrix", matrix_path, "whitespace or comma separated square matrix file");
  po->excludes(mo);
  lo->add_option("--tol", tol, "relative degeneracy tolerance");
  lo->add_option("--out", lo_out, "write eigenvalue classes as CSV into this directory");

  auto* rp = app.add_subcommand("reproduce", "run a figure protocol");
  add_common(rp, common);
  std::string which;
  rp->add_option("figure", which, "fig1, fig2, fig3 or appB")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "appB"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  if (*sc) {
    io::RunConfig cfg = load(common);
    if (L) cfg.chain.L = *L;
    validate(cfg);
    const io::SpectrumCache cache(cfg.cache_dir, cfg.cache);
    const Spectrum s = chain_total_spectrum(cfg.chain, cache);
    const fs::path path = fs::path(cfg.out_dir) / ("spin_chain_L" + std::to_string(cfg.chain.L) + "_spectrum.csv");
    io::CsvWriter w(path, io::Schema::spectrum);
    for (Index k = 0; k < s.dim(); ++k) w.row({static_cast<long long>(k), s.values(k)});
    w.close();
    std::cout << "dim " << s.dim() << "  E_min " << io::format_real(s.min()) << "  E_max " << io::format_real(s.max())
              << "\n";
    print_files({path});
    return ok;
  }

  if (*rs) {
    io::RunConfig cfg = load(common);
    cfg.random.validate();
    const io::SpectrumCache cache(cfg.cache_dir, cfg.cache);
    const BipartiteSystem sys = cached_random_system(cfg.random, cache);
    ProfileOptions opts;
    opts.center_fraction = cfg.center_fraction;
    const auto prof = profile(compute_coefficients(sys), opts);
    const fs::path path = fs::path(cfg.out_dir) / "random_system_spectrum.csv";
    io::CsvWriter w(path, io::Schema::spectrum);
    for (Index k = 0; k < sys.dim(); ++k) w.row({static_cast<long long>(k), sys.spec_t.values(k)});
    w.close();
    const auto gaps = spectral_gaps(sys.spec_a.values);
    std::cout << "dim_A " << sys.dim_a << "  dim_B " << sys.dim_b << "  ||H_I|| " << io::format_real(sys.interaction_norm)
              << "  sigma_S " << io::format_real(prof.sigma_s) << "  min gap omega "
              << io::format_real(gaps.empty() ? 0.0 : gaps.front()) << "\n";
    print_files({path});
    return ok;
  }

  if (*co) {
    io::RunConfig cfg = load(common);
    cfg.experiment = io::Experiment::fig1;
    if (coeff_cut > 0) cfg.cuts = {coeff_cut};
    validate(cfg);
    const auto r = run_figure(cfg);
    std::cout << "sigma_S " << io::format_real(r.manifest["results"]["sigma_S"].get<double>()) << "\n";
    print_files(r.files);
    return ok;
  }

  if (*pr) {
    io::RunConfig cfg = load(common);
    if (pred_cut > 0) cfg.cuts = {pred_cut};
    for (const auto& n : kind_names) {
      const auto k = parse_ansatz_kind(n);
      if (!k) throw ConfigError("unknown ansatz kind '" + n + "'");
      cfg.kinds.push_back(*k);
    }
    validate(cfg);
    const io::SpectrumCache cache(cfg.cache_dir, cfg.cache);
    const int cut = cfg.cuts.front();
    const BipartiteSystem sys = decompose_chain(cfg.chain, cut, chain_total_spectrum(cfg.chain, cache));
    ProfileOptions opts;
    opts.center_fraction = cfg.center_fraction;
    const double sigma_s = sigma_s_arg ? *sigma_s_arg : profile(compute_coefficients(sys), opts).sigma_s;
    const AnsatzModel model = AnsatzModel::from_system(sys, sigma_s, TypicalOperator{1.0}, cfg.dos_bins);
    const double wmax = omega_max > 0.0 ? omega_max : sys.spec_a.range();
    const double step = omega_step > 0.0 ? omega_step : rescaled_bin_width(cfg, sys.spec_t.range());
    std::vector<double> omegas;
    for (double w = 0.5 * step; w <= wmax; w += step) omegas.push_back(w);
    const fs::path path = fs::path(cfg.out_dir) / ("prediction_LA" + std::to_string(cut) + ".csv");
    io::CsvWriter w(path, io::Schema::prediction);
    for (AnsatzKind k : cfg.kinds)
      for (const auto& pt : predict(model, k, ebar, omegas).points)
        w.row({std::string(to_string(k)), ebar, pt.omega, pt.f, pt.entropic_factor, pt.variance});
    w.close();
    std::cout << "sigma_S " << io::format_real(sigma_s) << "\n";
    print_files({path});
    return ok;
  }

  if (*lo) {
    if (pauli.empty() && matrix_path.empty()) throw ConfigError("localize: give --pauli or --matrix");
    const Matrix op = pauli.empty() ? read_matrix(matrix_path) : pauli_string(pauli);
    const LocalizingBasis lb = localizing_basis(op, tol);
    const auto& rep = lb.report;
    std::cout << "dim " << rep.total_dim << "  classes " << rep.classes.size() << "  gcd " << rep.gcd_multiplicity
              << "  D_O " << rep.localizable_dim << "\n";
    const Matrix rebuilt =
        lb.basis * kron(lb.local_block, Matrix::Identity(rep.gcd_multiplicity, rep.gcd_multiplicity)) *
        lb.basis.transpose();
    std::cout << "reconstruction error " << io::format_real(max_abs(rebuilt - op)) << "\n";
    for (const auto& c : rep.classes)
      std::cout << "  " << io::format_real(c.value) << " x" << c.multiplicity << "\n";
    if (!lo_out.empty()) {
      const fs::path path = fs::path(lo_out) / "localize_classes.csv";
      io::CsvWriter w(path, io::Schema::localize);
      for (const auto& c : rep.classes) w.row({c.value, static_cast<long long>(c.multiplicity), c.spread});
      w.close();
      print_files({path});
    }
    return ok;
  }

  if (*rp) {
    io::RunConfig cfg = load(common);
    cfg.experiment = io::parse_experiment(which);
    cfg.cuts.clear();
    cfg.ebar_fractions.clear();
    if (!common.config.empty()) {
      // keep scan values the file sets explicitly
      io::RunConfig file = io::parse_config(common.config);
      if (file.experiment == cfg.experiment) {
        cfg.cuts = file.cuts;
        cfg.ebar_fractions = file.ebar_fractions;
      }
    }
    validate(cfg);
    const auto r = run_figure(cfg);
    print_files(r.files);
    return ok;
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return config_error;
  } catch (const CachePolicyError& e) {
    std::cerr << "cache policy: " << e.what() << "\n";
    return cache_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return compute_error;
  }
}
