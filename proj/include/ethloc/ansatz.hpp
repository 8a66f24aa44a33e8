#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ethloc/density.hpp"
#include "ethloc/error.hpp"
#include "ethloc/hamiltonians.hpp"
#include "ethloc/linalg.hpp"
#include "ethloc/quadrature.hpp"
#include "ethloc/scrambling.hpp"

namespace ethloc {

// Predictions for off-diagonal variances E|O_αβ|² = e^{-S(Ē)} f(Ē, ω)² of
// operators local to the A factor, with e^{-S/2} = (σ_S n_0(Ē))^{-1/2}.

/// |O_ij|² replaced by its mean O2bar / dim_A.
struct TypicalOperator {
  double mean_square = 1.0;
};

/// Either the typical-operator substitution or a concrete O_A matrix.
using LocalOperator = std::variant<TypicalOperator, Matrix>;

/// |O_ij|² in the H_A eigenbasis.
inline Matrix squared_elements(const LocalOperator& op, const Spectrum& spec_a) {
  const Index d = spec_a.dim();
  if (const auto* t = std::get_if<TypicalOperator>(&op)) return Matrix::Constant(d, d, t->mean_square / static_cast<double>(d));
  const Matrix& o = std::get<Matrix>(op);
  if (o.rows() != d || o.cols() != d) throw InvalidInput("local operator does not match the A factor dimension");
  const Matrix rotated = spec_a.vectors.transpose() * o * spec_a.vectors;
  return rotated.cwiseAbs2();
}

/// Mean of the squared spectrum, tr(O²)/dim.
inline double mean_square(const LocalOperator& op) {
  if (const auto* t = std::get_if<TypicalOperator>(&op)) return t->mean_square;
  const Matrix& o = std::get<Matrix>(op);
  return o.squaredNorm() / static_cast<double>(o.rows());
}

namespace detail {

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be positive and finite (got " << v << ")";
    throw InvalidInput(os.str());
  }
}

inline double density_at(const SpectralDensity& n, double e, const char* what) {
  const double v = n(e);
  if (!(v > 0.0)) {
    std::ostringstream os;
    os << what << ": energy " << e << " lies outside the support of the density of states ["
       << n.spectral_min << ", " << n.spectral_max << "]";
    throw InvalidInput(os.str());
  }
  return v;
}

/// Number of sorted values inside the closed interval [lo, hi].
inline Index count_in(std::span<const double> sorted, double lo, double hi) {
  if (hi < lo) return 0;
  const auto a = std::lower_bound(sorted.begin(), sorted.end(), lo);
  const auto b = std::upper_bound(sorted.begin(), sorted.end(), hi);
  return static_cast<Index>(b - a);
}

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace detail

inline double entropic_factor(const SpectralDensity& n0, double ebar, double sigma_s) {
  detail::require_positive(sigma_s, "entropic_factor: sigma_S");
  const double n = detail::density_at(n0, ebar, "entropic_factor");
  return 1.0 / std::sqrt(sigma_s * n);
}

inline double rmt_variance(double o2bar, Index total_dim) {
  if (total_dim < 1) throw InvalidInput("rmt_variance: total_dim must be >= 1");
  return o2bar / static_cast<double>(total_dim);
}

/// Perfect microcanonical scrambling with literal window counts:
/// sqrt( Σ_ij |B(Eα - E_i) ∩ B(Eβ - E_j)| |O_ij|² / (|H0(Eα)| |H0(Eβ)|) ).
/// Windows are closed intervals of width Δ; inputs must be sorted ascending.
inline double f_microcanonical_exact(std::span<const double> e_a, std::span<const double> e_b,
                                     std::span<const double> e_0, const Matrix& sq_elements, double delta,
                                     double e_alpha, double e_beta) {
  detail::require_positive(delta, "f_microcanonical_exact: Delta");
  const double half = 0.5 * delta;
  const Index n_alpha = detail::count_in(e_0, e_alpha - half, e_alpha + half);
  const Index n_beta = detail::count_in(e_0, e_beta - half, e_beta + half);
  if (n_alpha == 0 || n_beta == 0) {
    std::ostringstream os;
    os << "f_microcanonical_exact: empty H_0 window at " << (n_alpha == 0 ? e_alpha : e_beta) << " (width " << delta
       << ")";
    throw ComputeError(os.str());
  }
  double sum = 0.0;
  const auto da = static_cast<Index>(e_a.size());
  for (Index i = 0; i < da; ++i)
    for (Index j = 0; j < da; ++j) {
      const double c1 = e_alpha - e_a[static_cast<std::size_t>(i)];
      const double c2 = e_beta - e_a[static_cast<std::size_t>(j)];
      const Index overlap = detail::count_in(e_b, std::max(c1, c2) - half, std::min(c1, c2) + half);
      if (overlap > 0) sum += static_cast<double>(overlap) * sq_elements(i, j);
    }
  return std::sqrt(sum / (static_cast<double>(n_alpha) * static_cast<double>(n_beta)));
}

inline double f_microcanonical_exact(const BipartiteSystem& sys, const LocalOperator& op, double delta,
                                     double e_alpha, double e_beta) {
  return f_microcanonical_exact(detail::as_span(sys.spec_a.values), detail::as_span(sys.spec_b.values),
                                detail::as_span(sys.energies_0), squared_elements(op, sys.spec_a), delta, e_alpha,
                                e_beta);
}

/// Z(E) = Σ_ij h(E - E_i - E_j)
inline double scrambling_partition(std::span<const double> e_a, std::span<const double> e_b,
                                   const ScramblingShape& shape, double e) {
  double z = 0.0;
  for (double a : e_a)
    for (double b : e_b) z += shape.h(e - (a + b));
  return z;
}

/// Smooth scrambling with exact discrete sums:
/// sqrt( Σ_ijk h(Eα-E_i-E_k) h(Eβ-E_j-E_k) |O_ij|² / (Z(Eα) Z(Eβ)) ).
inline double f_smooth_sums(std::span<const double> e_a, std::span<const double> e_b, const Matrix& sq_elements,
                            const ScramblingShape& shape, double e_alpha, double e_beta) {
  const auto da = static_cast<Index>(e_a.size());
  const auto db = static_cast<Index>(e_b.size());
  Matrix ha(da, db), hb(da, db);
  for (Index i = 0; i < da; ++i)
    for (Index k = 0; k < db; ++k) {
      const double ea = e_a[static_cast<std::size_t>(i)], eb = e_b[static_cast<std::size_t>(k)];
      ha(i, k) = shape.h(e_alpha - (ea + eb));
      hb(i, k) = shape.h(e_beta - (ea + eb));
    }
  const double z_alpha = ha.sum();
  const double z_beta = hb.sum();
  if (!(z_alpha > 0.0) || !(z_beta > 0.0)) {
    std::ostringstream os;
    os << "f_smooth_sums: normalization Z underflows at " << (z_alpha > 0.0 ? e_beta : e_alpha)
       << "; the energy lies too far outside the spectrum";
    throw ComputeError(os.str());
  }
  const Matrix overlap = ha * hb.transpose();
  const double sum = overlap.cwiseProduct(sq_elements).sum();
  return std::sqrt(std::max(0.0, sum) / (z_alpha * z_beta));
}

inline double f_smooth_sums(const BipartiteSystem& sys, const LocalOperator& op, const ScramblingShape& shape,
                            double e_alpha, double e_beta) {
  return f_smooth_sums(detail::as_span(sys.spec_a.values), detail::as_span(sys.spec_b.values),
                       squared_elements(op, sys.spec_a), shape, e_alpha, e_beta);
}

/// Narrow-scrambling typical-operator envelope:
/// f² = (O2bar/|H_A|) σ_S n_0(Ē) / (n_0(Ē+ω) n_0(Ē-ω)) ∫dε n_A(ε+ω) n_A(ε-ω) n_B(Ē-ε).
inline double f_narrow(const SpectralDensity& n_a, const SpectralDensity& n_b, const SpectralDensity& n_0,
                       double o2bar, double sigma_s, double ebar, double omega, QuadratureOptions opts = {}) {
  detail::require_positive(sigma_s, "f_narrow: sigma_S");
  const double n0_bar = detail::density_at(n_0, ebar, "f_narrow");
  const double n0_plus = detail::density_at(n_0, ebar + omega, "f_narrow");
  const double n0_minus = detail::density_at(n_0, ebar - omega, "f_narrow");
  const double w = std::abs(omega);
  const double lo = std::max(n_a.spectral_min + w, ebar - n_b.spectral_max);
  const double hi = std::min(n_a.spectral_max - w, ebar - n_b.spectral_min);
  double integral = 0.0;
  if (hi > lo) {
    std::vector<double> kinks;
    kinks.reserve(2 * n_a.grid.size() + n_b.grid.size());
    for (double g : n_a.grid) {
      kinks.push_back(g - omega);
      kinks.push_back(g + omega);
    }
    for (double g : n_b.grid) kinks.push_back(ebar - g);
    integral = integrate_adaptive([&](double e) { return n_a(e + omega) * n_a(e - omega) * n_b(ebar - e); }, lo, hi,
                                  kinks, opts);
  }
  const double f2 = o2bar / n_a.total * sigma_s * n0_bar / (n0_plus * n0_minus) * integral;
  return std::sqrt(std::max(0.0, f2));
}

/// Small-A narrow-scrambling envelope f² = O2bar σ_S [ρ_A ⋆ ρ_A](2ω).
inline double f_small_a(const SpectralDensity& rho_a, double o2bar, double sigma_s, double omega,
                        QuadratureOptions opts = {}) {
  const SpectralDensity rho = rho_a.total == 1.0 ? rho_a : rho_a.fractional();
  const double corr = correlate_at(rho.as_function(), rho.as_function(), 2.0 * omega, opts);
  return std::sqrt(std::max(0.0, o2bar * sigma_s * corr));
}

/// Small-A envelope for a flat ρ_A of width σ_A: a linear decay of f² that
/// vanishes for |ω| > σ_A/2.
inline double f_flat_a(double sigma_a, double o2bar, double sigma_s, double omega) {
  detail::require_positive(sigma_a, "f_flat_a: sigma_A");
  const double x = 1.0 - 2.0 * std::abs(omega) / sigma_a;
  if (x <= 0.0) return 0.0;
  return std::sqrt(o2bar * sigma_s / sigma_a * x);
}

/// Exponential scrambling envelope with flat ρ_A:
/// f² = O2bar/(2√2) ∫_{-1}^{1} dx (1-|x|)(1 + √2|2ω - xσ_A|/σ_S) exp(-√2|2ω - xσ_A|/σ_S).
inline double f_exp_decay(double sigma_a, double sigma_s, double o2bar, double omega, QuadratureOptions opts = {}) {
  detail::require_positive(sigma_a, "f_exp_decay: sigma_A");
  detail::require_positive(sigma_s, "f_exp_decay: sigma_S");
  constexpr double r2 = std::numbers::sqrt2;
  auto integrand = [&](double x) {
    const double u = r2 * std::abs(2.0 * omega - x * sigma_a) / sigma_s;
    return (1.0 - std::abs(x)) * (1.0 + u) * std::exp(-u);
  };
  const double kinks[] = {0.0, 2.0 * omega / sigma_a};
  const double integral = integrate_adaptive(integrand, -1.0, 1.0, kinks, opts);
  return std::sqrt(std::max(0.0, o2bar / (2.0 * r2) * integral));
}

/// Flat-window (microcanonical) scrambling of finite width with n_B constant:
/// f² = (O2bar σ_A/(2√3)) ∫_{-1}^{1} dx [ρ_A⋆ρ_A](xσ_A) (1 - |ω - xσ_A/2|/(√3σ_S)) Θ(...).
/// `autocorr` is [ρ_A⋆ρ_A] sampled by autocorrelate().
inline double f_mc_finite_width(const SampledFunction& autocorr, double o2bar, double sigma_a, double sigma_s,
                                double omega, QuadratureOptions opts = {}) {
  detail::require_positive(sigma_a, "f_mc_finite_width: sigma_A");
  detail::require_positive(sigma_s, "f_mc_finite_width: sigma_S");
  const double w = std::numbers::sqrt3 * sigma_s;
  const double lo = std::max(-1.0, 2.0 * (omega - w) / sigma_a);
  const double hi = std::min(1.0, 2.0 * (omega + w) / sigma_a);
  if (!(hi > lo)) return 0.0;
  std::vector<double> kinks{2.0 * omega / sigma_a, 0.0};
  for (double g : autocorr.grid) kinks.push_back(g / sigma_a);
  auto integrand = [&](double x) {
    const double t = 1.0 - std::abs(omega - 0.5 * x * sigma_a) / w;
    return t > 0.0 ? autocorr(x * sigma_a) * t : 0.0;
  };
  const double integral = integrate_adaptive(integrand, lo, hi, kinks, opts);
  return std::sqrt(std::max(0.0, o2bar * sigma_a / (2.0 * std::numbers::sqrt3) * integral));
}

inline double f_mc_finite_width(const SpectralDensity& rho_a, double o2bar, double sigma_a, double sigma_s,
                                double omega, QuadratureOptions opts = {}) {
  const SpectralDensity rho = rho_a.total == 1.0 ? rho_a : rho_a.fractional();
  return f_mc_finite_width(autocorrelate(rho, opts), o2bar, sigma_a, sigma_s, omega, opts);
}

/// Smooth scrambling, n_B constant across the A range, discrete A spectrum:
/// f² = O2bar σ_S / (N_h² |H_A|²) Σ_ij [h⋆h](2ω - (E_i - E_j)).
inline double f_smooth_small_a(std::span<const double> e_a, const ScramblingShape& shape, double o2bar,
                               double omega) {
  double sum = 0.0;
  for (double a : e_a)
    for (double b : e_a) sum += shape.autocorrelation(2.0 * omega - (a - b));
  const double da = static_cast<double>(e_a.size());
  const double nh = shape.norm();
  return std::sqrt(o2bar * shape.sigma_s * sum / (nh * nh * da * da));
}

/// Off-diagonal variance of the smooth scrambling ansatz with interpolated
/// densities and a discrete A spectrum:
/// Σ_ij n_B(Ē - Ē_ij) [h⋆h](2ω - 2ω_ij) |O_ij|² / (N_h² n_0(Ē+ω) n_0(Ē-ω)).
inline double variance_smooth_interpolated(std::span<const double> e_a, const Matrix& sq_elements,
                                           const SpectralDensity& n_b, const SpectralDensity& n_0,
                                           const ScramblingShape& shape, double ebar, double omega) {
  const double n0_plus = detail::density_at(n_0, ebar + omega, "smooth prediction");
  const double n0_minus = detail::density_at(n_0, ebar - omega, "smooth prediction");
  const auto da = static_cast<Index>(e_a.size());
  double sum = 0.0;
  for (Index i = 0; i < da; ++i)
    for (Index j = 0; j < da; ++j) {
      const double ei = e_a[static_cast<std::size_t>(i)], ej = e_a[static_cast<std::size_t>(j)];
      sum += n_b(ebar - 0.5 * (ei + ej)) * shape.autocorrelation(2.0 * omega - (ei - ej)) * sq_elements(i, j);
    }
  const double nh = shape.norm();
  return sum / (nh * nh * n0_plus * n0_minus);
}

/// β_α = d ln n_B / dE at E_α - mean(E^A), by central difference.
inline double gibbs_beta(const SpectralDensity& n_b, double e_alpha, double mean_e_a, double step) {
  detail::require_positive(step, "gibbs_beta: step");
  const double x = e_alpha - mean_e_a;
  const double up = n_b(x + step), down = n_b(x - step);
  if (!(up > 0.0) || !(down > 0.0)) {
    std::ostringstream os;
    os << "gibbs_diagonal: E_alpha = " << e_alpha << " is too close to the spectrum edge to differentiate ln n_B";
    throw InvalidInput(os.str());
  }
  return (std::log(up) - std::log(down)) / (2.0 * step);
}

/// Σ_i e^{-β E_i} O_ii / Σ_j e^{-β E_j} in the H_A eigenbasis.
inline double gibbs_expectation(const Spectrum& spec_a, const Matrix& o_a, double beta) {
  const Vector diag = (spec_a.vectors.transpose() * o_a * spec_a.vectors).diagonal();
  const double shift = beta >= 0.0 ? spec_a.min() : spec_a.max();
  double num = 0.0, den = 0.0;
  for (Index i = 0; i < spec_a.dim(); ++i) {
    const double w = std::exp(-beta * (spec_a.values(i) - shift));
    num += w * diag(i);
    den += w;
  }
  return num / den;
}

struct GibbsOptions {
  int dos_bins = 64;
  double step_fraction = 1.0 / 200.0;  // finite-difference step as a fraction of σ_0
};

inline double gibbs_diagonal(const BipartiteSystem& sys, const SpectralDensity& n_b, const Matrix& o_a,
                             double e_alpha, GibbsOptions opts = {}) {
  const double sigma_0 = sys.energies_0(sys.energies_0.size() - 1) - sys.energies_0(0);
  const double beta = gibbs_beta(n_b, e_alpha, sys.spec_a.values.mean(), sigma_0 * opts.step_fraction);
  return gibbs_expectation(sys.spec_a, o_a, beta);
}

inline double gibbs_diagonal(const BipartiteSystem& sys, const Matrix& o_a, double e_alpha, GibbsOptions opts = {}) {
  return gibbs_diagonal(sys, density_of_states(sys.spec_b.values, opts.dos_bins), o_a, e_alpha, opts);
}

// ---------------------------------------------------------------------------
// Model catalogue

enum class AnsatzKind {
  microcanonical_exact_sums,
  narrow_scrambling,
  small_A_narrow,
  flat_A_narrow,
  smooth_general_sums,
  smooth_small_A,
  exp_decay_flat_A,
  mc_finite_width_flat_A,
  smooth_interpolated,
};

inline constexpr AnsatzKind all_ansatz_kinds[] = {
    AnsatzKind::microcanonical_exact_sums, AnsatzKind::narrow_scrambling,    AnsatzKind::small_A_narrow,
    AnsatzKind::flat_A_narrow,             AnsatzKind::smooth_general_sums,  AnsatzKind::smooth_small_A,
    AnsatzKind::exp_decay_flat_A,          AnsatzKind::mc_finite_width_flat_A, AnsatzKind::smooth_interpolated,
};

inline std::string_view to_string(AnsatzKind k) {
  switch (k) {
    case AnsatzKind::microcanonical_exact_sums: return "microcanonical_exact_sums";
    case AnsatzKind::narrow_scrambling: return "narrow_scrambling";
    case AnsatzKind::small_A_narrow: return "small_A_narrow";
    case AnsatzKind::flat_A_narrow: return "flat_A_narrow";
    case AnsatzKind::smooth_general_sums: return "smooth_general_sums";
    case AnsatzKind::smooth_small_A: return "smooth_small_A";
    case AnsatzKind::exp_decay_flat_A: return "exp_decay_flat_A";
    case AnsatzKind::mc_finite_width_flat_A: return "mc_finite_width_flat_A";
    case AnsatzKind::smooth_interpolated: return "smooth_interpolated";
  }
  return "unknown";
}

inline std::optional<AnsatzKind> parse_ansatz_kind(std::string_view s) {
  for (AnsatzKind k : all_ansatz_kinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

/// Everything a prediction may need, derived once from a system.
struct AnsatzModel {
  Vector e_a, e_b, e_0;  // ascending
  SpectralDensity n_a, n_b, n_0, rho_a;
  SampledFunction rho_a_autocorr;
  Matrix sq_elements;  // |O_ij|² in the H_A eigenbasis
  double o2bar = 1.0;
  double sigma_s = 1.0;
  double sigma_a = 1.0;

  ScramblingShape exponential() const { return {ScramblingForm::exponential, sigma_s}; }
  ScramblingShape flat_window() const { return {ScramblingForm::flat_window, sigma_s}; }

  static AnsatzModel from_spectra(const Spectrum& spec_a, const Vector& e_b, const Vector& e_0, double sigma_s,
                                  const LocalOperator& op, int dos_bins = 64) {
    detail::require_positive(sigma_s, "AnsatzModel: sigma_S");
    AnsatzModel m;
    m.e_a = spec_a.values;
    m.e_b = e_b;
    m.e_0 = e_0;
    m.sigma_s = sigma_s;
    m.o2bar = mean_square(op);
    detail::require_positive(m.o2bar, "AnsatzModel: O2bar");
    m.sq_elements = squared_elements(op, spec_a);
    m.n_b = density_of_states(e_b, dos_bins);
    m.n_0 = density_of_states(e_0, dos_bins);
    if (spec_a.dim() >= 2 && spec_a.range() > 0.0) {
      m.n_a = density_of_states(spec_a.values, std::max(4, std::min<int>(dos_bins, static_cast<int>(spec_a.dim()))));
      m.rho_a = m.n_a.fractional();
      m.rho_a_autocorr = autocorrelate(m.rho_a);
      m.sigma_a = spec_a.range();
    }
    return m;
  }

  static AnsatzModel from_system(const BipartiteSystem& sys, double sigma_s, const LocalOperator& op,
                                 int dos_bins = 64) {
    return from_spectra(sys.spec_a, sys.spec_b.values, sys.energies_0, sigma_s, op, dos_bins);
  }
};

struct PredictionPoint {
  double omega = 0.0;
  double f = 0.0;
  double entropic_factor = 0.0;
  double variance = 0.0;
};

struct Prediction {
  AnsatzKind kind{};
  double ebar = 0.0;
  std::vector<PredictionPoint> points;
};

/// Off-diagonal variance predicted by `kind` at (Ē, ω). The discrete-sum
/// kinds carry the entropic suppression implicitly; f is then backed out
/// from the variance so that variance = (entropic_factor * f)² always holds.
inline PredictionPoint predict_point(const AnsatzModel& m, AnsatzKind kind, double ebar, double omega) {
  PredictionPoint p;
  p.omega = omega;
  p.entropic_factor = entropic_factor(m.n_0, ebar, m.sigma_s);
  const double ef2 = p.entropic_factor * p.entropic_factor;
  auto from_variance = [&](double var) {
    p.variance = var;
    p.f = std::sqrt(var / ef2);
  };
  auto from_f = [&](double f) {
    p.f = f;
    p.variance = ef2 * f * f;
  };
  const auto ea = detail::as_span(m.e_a);
  const auto eb = detail::as_span(m.e_b);
  switch (kind) {
    case AnsatzKind::microcanonical_exact_sums: {
      const double v = f_microcanonical_exact(ea, eb, detail::as_span(m.e_0), m.sq_elements,
                                              m.flat_window().width(), ebar + omega, ebar - omega);
      from_variance(v * v);
      break;
    }
    case AnsatzKind::smooth_general_sums: {
      const double v = f_smooth_sums(ea, eb, m.sq_elements, m.exponential(), ebar + omega, ebar - omega);
      from_variance(v * v);
      break;
    }
    case AnsatzKind::smooth_interpolated:
      from_variance(variance_smooth_interpolated(ea, m.sq_elements, m.n_b, m.n_0, m.exponential(), ebar, omega));
      break;
    case AnsatzKind::narrow_scrambling:
      from_f(f_narrow(m.n_a, m.n_b, m.n_0, m.o2bar, m.sigma_s, ebar, omega));
      break;
    case AnsatzKind::small_A_narrow:
      from_f(std::sqrt(m.o2bar * m.sigma_s * m.rho_a_autocorr(2.0 * omega)));
      break;
    case AnsatzKind::flat_A_narrow:
      from_f(f_flat_a(m.sigma_a, m.o2bar, m.sigma_s, omega));
      break;
    case AnsatzKind::smooth_small_A:
      from_f(f_smooth_small_a(ea, m.exponential(), m.o2bar, omega));
      break;
    case AnsatzKind::exp_decay_flat_A:
      from_f(f_exp_decay(m.sigma_a, m.sigma_s, m.o2bar, omega));
      break;
    case AnsatzKind::mc_finite_width_flat_A:
      from_f(f_mc_finite_width(m.rho_a_autocorr, m.o2bar, m.sigma_a, m.sigma_s, omega));
      break;
  }
  return p;
}

/// Evaluates `kind` over an ω grid, dropping points whose energies fall
/// outside the support of the densities.
inline Prediction predict(const AnsatzModel& m, AnsatzKind kind, double ebar, std::span<const double> omegas) {
  Prediction out{kind, ebar, {}};
  for (double w : omegas) {
    try {
      out.points.push_back(predict_point(m, kind, ebar, w));
    } catch (const InvalidInput&) {
    } catch (const ComputeError&) {
    }
  }
  return out;
}

}  // namespace ethloc
