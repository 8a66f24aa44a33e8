#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "ethloc/error.hpp"
#include "ethloc/hamiltonians.hpp"
#include "ethloc/linalg.hpp"

namespace ethloc {

/// c[α, i, j] = <E_i^A, E_j^B | E_α^T>, stored as a matrix with product
/// index i*dim_b + j down the rows and α across the columns.
struct ScramblingCoefficients {
  Index dim_a = 0;
  Index dim_b = 0;
  Matrix c;
  Vector energies_t, energies_a, energies_b;

  double at(Index alpha, Index i, Index j) const { return c(i * dim_b + j, alpha); }
  double offset(Index alpha, Index i, Index j) const { return energies_t(alpha) - (energies_a(i) + energies_b(j)); }
};

inline ScramblingCoefficients compute_coefficients(const BipartiteSystem& sys) {
  if (sys.spec_a.dim() != sys.dim_a || sys.spec_b.dim() != sys.dim_b || sys.spec_t.dim() != sys.dim())
    throw InvalidInput("compute_coefficients: system spectra do not match its dimensions");
  ScramblingCoefficients out;
  out.dim_a = sys.dim_a;
  out.dim_b = sys.dim_b;
  if (sys.interaction_norm == 0.0 && sys.h_i.isZero(0.0) && sys.spec_t.values == sys.energies_0) {
    // H_T = H_0 exactly and spec_t is the product basis: c is a permutation.
    Vector sums(sys.dim());
    for (Index i = 0; i < sys.dim_a; ++i)
      for (Index j = 0; j < sys.dim_b; ++j) sums(i * sys.dim_b + j) = sys.spec_a.values(i) + sys.spec_b.values(j);
    const auto order = argsort(sums);
    out.c = Matrix::Zero(sys.dim(), sys.dim());
    for (Index k = 0; k < sys.dim(); ++k) out.c(order[static_cast<std::size_t>(k)], k) = 1.0;
  } else {
    out.c = apply_kron_transpose(sys.spec_a.vectors, sys.spec_b.vectors, sys.spec_t.vectors);
  }
  out.energies_t = sys.spec_t.values;
  out.energies_a = sys.spec_a.values;
  out.energies_b = sys.spec_b.values;
  return out;
}

enum class ScramblingForm { flat_window, exponential };

/// Scrambling envelope h(E) fixed by its standard deviation σ_S.
struct ScramblingShape {
  ScramblingForm form = ScramblingForm::exponential;
  double sigma_s = 1.0;

  double width() const { return 2.0 * std::numbers::sqrt3 * sigma_s; }  // Δ of the flat window

  double h(double e) const {
    if (form == ScramblingForm::exponential) return std::exp(-std::numbers::sqrt2 * std::abs(e) / sigma_s);
    return std::abs(e) <= 0.5 * width() ? 1.0 : 0.0;
  }

  /// N_h = ∫ h
  double norm() const { return form == ScramblingForm::exponential ? std::numbers::sqrt2 * sigma_s : width(); }

  /// [h ⋆ h](E) in closed form.
  double autocorrelation(double e) const {
    const double a = std::abs(e);
    if (form == ScramblingForm::exponential)
      return (sigma_s / std::numbers::sqrt2 + a) * std::exp(-std::numbers::sqrt2 * a / sigma_s);
    return std::max(0.0, width() - a);
  }
};

struct ScramblingProfile {
  std::vector<double> offsets;  // bin centres of E_α - E_i - E_j
  std::vector<double> mean_sq;  // mean c² per bin
  std::vector<long> counts;
  double sigma_s = 0.0;
  double mean_offset = 0.0;
  Index window_states = 0;
  double window_lo = 0.0, window_hi = 0.0;
  ScramblingShape shape;

  double h(double e) const { return shape.h(e); }
  double norm_h() const { return shape.norm(); }
};

struct ProfileOptions {
  double center_fraction = 0.5;
  double offset_bin_width = 0.1;
  double offset_max = 8.0;
  ScramblingForm form = ScramblingForm::exponential;
};

/// Scrambling statistics over total eigenstates in the central
/// `center_fraction` of the spectral range. Each state's c²-weighted offset
/// distribution has its own mean and variance; σ_S is the root mean of those
/// variances over the window, and the envelope h is then fixed by σ_S.
inline ScramblingProfile profile(const ScramblingCoefficients& co, ProfileOptions opts = {}) {
  if (!(opts.center_fraction > 0.0 && opts.center_fraction <= 1.0))
    throw InvalidInput("profile: center_fraction must lie in (0, 1]");
  if (!(opts.offset_bin_width > 0.0) || !(opts.offset_max > 0.0))
    throw InvalidInput("profile: offset binning must be positive");
  const Vector& et = co.energies_t;
  const double lo = et.minCoeff(), hi = et.maxCoeff();
  const double mid = 0.5 * (lo + hi), half = 0.5 * opts.center_fraction * (hi - lo);

  ScramblingProfile p;
  p.window_lo = mid - half;
  p.window_hi = mid + half;
  const auto nbins = static_cast<std::size_t>(std::ceil(2.0 * opts.offset_max / opts.offset_bin_width));
  std::vector<double> sums(nbins, 0.0);
  p.counts.assign(nbins, 0);

  double w_tot = 0.0, w_off = 0.0, var_sum = 0.0;
  for (Index alpha = 0; alpha < et.size(); ++alpha) {
    if (et(alpha) < p.window_lo || et(alpha) > p.window_hi) continue;
    ++p.window_states;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (Index i = 0; i < co.dim_a; ++i)
      for (Index j = 0; j < co.dim_b; ++j) {
        const double c = co.c(i * co.dim_b + j, alpha);
        const double w = c * c;
        const double off = co.offset(alpha, i, j);
        s0 += w;
        s1 += w * off;
        s2 += w * off * off;
        const double pos = (off + opts.offset_max) / opts.offset_bin_width;
        if (pos >= 0.0 && pos < static_cast<double>(nbins)) {
          const auto b = static_cast<std::size_t>(pos);
          sums[b] += w;
          ++p.counts[b];
        }
      }
    w_tot += s0;
    w_off += s1;
    const double m = s1 / s0;
    var_sum += std::max(0.0, s2 / s0 - m * m);
  }
  if (p.window_states == 0) {
    std::ostringstream os;
    os << "profile: no total eigenstates in the central window [" << p.window_lo << ", " << p.window_hi << "]";
    throw InvalidInput(os.str());
  }
  p.mean_offset = w_off / w_tot;
  p.sigma_s = std::sqrt(var_sum / static_cast<double>(p.window_states));
  p.shape = ScramblingShape{opts.form, p.sigma_s};
  p.offsets.resize(nbins);
  p.mean_sq.resize(nbins);
  for (std::size_t b = 0; b < nbins; ++b) {
    p.offsets[b] = -opts.offset_max + (static_cast<double>(b) + 0.5) * opts.offset_bin_width;
    p.mean_sq[b] = p.counts[b] > 0 ? sums[b] / static_cast<double>(p.counts[b]) : 0.0;
  }
  return p;
}

}  // namespace ethloc
