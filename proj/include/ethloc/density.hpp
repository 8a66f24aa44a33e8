#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "ethloc/error.hpp"
#include "ethloc/linalg.hpp"
#include "ethloc/quadrature.hpp"

namespace ethloc {

/// Piecewise-linear function through (grid[k], values[k]); zero outside the
/// closed grid interval.
struct SampledFunction {
  std::vector<double> grid;
  std::vector<double> values;

  double lo() const { return grid.front(); }
  double hi() const { return grid.back(); }

  double operator()(double x) const {
    if (grid.empty() || x < grid.front() || x > grid.back()) return 0.0;
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    if (it == grid.end()) return values.back();
    const auto k = static_cast<std::size_t>(it - grid.begin());
    if (k == 0) return values.front();
    const double x0 = grid[k - 1], x1 = grid[k];
    const double t = (x - x0) / (x1 - x0);
    return (1.0 - t) * values[k - 1] + t * values[k];
  }

  double trapezoid() const {
    double s = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) s += 0.5 * (grid[k] - grid[k - 1]) * (values[k] + values[k - 1]);
    return s;
  }
};

/// A real function with bounded support [lo, hi] and known non-smooth points.
struct BoundedFunction {
  std::function<double(double)> f;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> kinks;

  double operator()(double x) const { return (x < lo || x > hi) ? 0.0 : f(x); }
};

/// Smooth density of states n_C on a grid. `values` counts states per unit
/// energy and integrates to `total` = |H_C|; it vanishes outside
/// [spectral_min, spectral_max].
struct SpectralDensity {
  std::vector<double> grid;
  std::vector<double> values;
  double total = 0.0;
  double spectral_min = 0.0;
  double spectral_max = 0.0;

  double range() const { return spectral_max - spectral_min; }

  double operator()(double e) const { return SampledFunction{grid, values}(e); }

  double integral() const { return SampledFunction{grid, values}.trapezoid(); }

  /// rho_C = n_C / |H_C|, integrating to one.
  SpectralDensity fractional() const {
    SpectralDensity out = *this;
    for (double& v : out.values) v /= total;
    out.total = 1.0;
    return out;
  }

  BoundedFunction as_function() const {
    SampledFunction s{grid, values};
    return BoundedFunction{[s](double x) { return s(x); }, spectral_min, spectral_max, grid};
  }

  /// Constant density total/(hi-lo) on [lo, hi], sampled at `points` nodes.
  static SpectralDensity flat(double lo, double hi, double total, std::size_t points = 257) {
    if (!(hi > lo) || points < 2) throw InvalidInput("SpectralDensity::flat: need hi > lo and >= 2 points");
    SpectralDensity d;
    d.total = total;
    d.spectral_min = lo;
    d.spectral_max = hi;
    for (std::size_t k = 0; k < points; ++k) {
      d.grid.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1));
      d.values.push_back(total / (hi - lo));
    }
    d.grid.back() = hi;
    return d;
  }
};

/// Histogram of eigenvalue counts over [min, max] divided by the bin width,
/// linearly interpolated between bin centres (edge half-bins held flat) and
/// resampled on 4*bins+1 nodes. The interpolant integrates exactly to the
/// eigenvalue count.
inline SpectralDensity density_of_states(std::span<const double> eigenvalues, int bins = 64) {
  if (eigenvalues.size() < 2) throw InvalidInput("density_of_states: need at least 2 eigenvalues");
  if (bins < 4) throw InvalidInput("density_of_states: need at least 4 bins");
  const auto [mn_it, mx_it] = std::minmax_element(eigenvalues.begin(), eigenvalues.end());
  const double lo = *mn_it, hi = *mx_it;
  if (!(hi > lo)) throw InvalidInput("density_of_states: zero-width spectrum (all eigenvalues identical)");

  const double width = (hi - lo) / bins;
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (double e : eigenvalues) {
    auto b = static_cast<long>(std::floor((e - lo) / width));
    b = std::clamp(b, 0L, static_cast<long>(bins - 1));
    counts[static_cast<std::size_t>(b)] += 1.0;
  }

  SampledFunction centres;
  centres.grid.push_back(lo);
  centres.values.push_back(counts.front() / width);
  for (int b = 0; b < bins; ++b) {
    centres.grid.push_back(lo + (b + 0.5) * width);
    centres.values.push_back(counts[static_cast<std::size_t>(b)] / width);
  }
  centres.grid.push_back(hi);
  centres.values.push_back(counts.back() / width);

  SpectralDensity d;
  d.total = static_cast<double>(eigenvalues.size());
  d.spectral_min = lo;
  d.spectral_max = hi;
  const int nodes = 4 * bins + 1;
  d.grid.resize(static_cast<std::size_t>(nodes));
  d.values.resize(static_cast<std::size_t>(nodes));
  for (int k = 0; k < nodes; ++k) {
    const double x = (k == nodes - 1) ? hi : lo + k * (width / 4.0);
    d.grid[static_cast<std::size_t>(k)] = x;
    d.values[static_cast<std::size_t>(k)] = centres(x);
  }
  return d;
}

inline SpectralDensity density_of_states(const Vector& eigenvalues, int bins = 64) {
  return density_of_states(std::span<const double>(eigenvalues.data(), static_cast<std::size_t>(eigenvalues.size())),
                           bins);
}

/// [g1 ⋆ g2](x) = ∫ dy g1(y) g2(x + y), by quadrature over the overlap of the
/// two supports, split at every kink of either factor.
inline double correlate_at(const BoundedFunction& g1, const BoundedFunction& g2, double x,
                           QuadratureOptions opts = {}) {
  const double a = std::max(g1.lo, g2.lo - x);
  const double b = std::min(g1.hi, g2.hi - x);
  if (!(b > a)) return 0.0;
  std::vector<double> kinks = g1.kinks;
  kinks.reserve(g1.kinks.size() + g2.kinks.size());
  for (double k : g2.kinks) kinks.push_back(k - x);
  return integrate_adaptive([&](double y) { return g1(y) * g2(x + y); }, a, b, kinks, opts);
}

/// Samples [g1 ⋆ g2] on `points` equally spaced lags covering its support
/// [g2.lo - g1.hi, g2.hi - g1.lo].
inline SampledFunction cross_correlate(const BoundedFunction& g1, const BoundedFunction& g2,
                                       std::size_t points = 513, QuadratureOptions opts = {}) {
  if (!(g1.hi > g1.lo) || !(g2.hi > g2.lo)) throw InvalidInput("cross_correlate: empty support");
  if (points < 3) throw InvalidInput("cross_correlate: need at least 3 sample points");
  const double lo = g2.lo - g1.hi;
  const double hi = g2.hi - g1.lo;
  SampledFunction out;
  out.grid.resize(points);
  out.values.resize(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double x = (k + 1 == points) ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    out.grid[k] = x;
    out.values[k] = correlate_at(g1, g2, x, opts);
  }
  return out;
}

/// Autocorrelation of a density, sampled on lags that are whole multiples of
/// the density's grid spacing when that grid is uniform.
inline SampledFunction autocorrelate(const SpectralDensity& rho, QuadratureOptions opts = {}) {
  const std::size_t n = rho.grid.size();
  return cross_correlate(rho.as_function(), rho.as_function(), 2 * n - 1, opts);
}

}  // namespace ethloc
