#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include "ethloc/error.hpp"
#include "ethloc/hamiltonians.hpp"
#include "ethloc/linalg.hpp"
#include "ethloc/random.hpp"

namespace ethloc {

struct OperatorEnsembleSpec {
  int count = 250;
  Index dim_a = 8;
  bool normalize = true;  // mean 0, mean square 1
  std::uint64_t seed = 1;

  void validate() const {
    if (count < 1) throw InvalidInput("operator ensemble: count must be >= 1");
    if (dim_a < 1) throw InvalidInput("operator ensemble: dim_A must be >= 1");
    if (normalize && dim_a == 1)
      throw InvalidInput(
          "operator ensemble: dim_A = 1 cannot be normalized (a mean-zero 1x1 spectrum is {0}, which has no unit "
          "mean square)");
  }
};

/// Spectrum drawn uniformly from [-1, 1], optionally shifted to mean zero and
/// scaled to unit mean square, then rotated by a Haar orthogonal matrix. The
/// stream depends only on (seed, index).
inline Matrix sample_local_operator(const OperatorEnsembleSpec& spec, int index) {
  spec.validate();
  if (index < 0 || index >= spec.count) {
    std::ostringstream os;
    os << "sample_local_operator: index " << index << " outside [0, " << spec.count << ")";
    throw InvalidInput(os.str());
  }
  Rng rng = derive_rng(spec.seed, static_cast<std::uint64_t>(index), 0x4f50u);
  Vector lambda(spec.dim_a);
  for (Index k = 0; k < spec.dim_a; ++k) lambda(k) = draw_uniform(rng, -1.0, 1.0);
  if (spec.normalize) {
    lambda.array() -= lambda.mean();
    const double ms = lambda.squaredNorm() / static_cast<double>(spec.dim_a);
    if (!(ms > 0.0)) throw ComputeError("sample_local_operator: sampled spectrum is degenerate");
    lambda /= std::sqrt(ms);
  }
  const Matrix u = haar_orthogonal(spec.dim_a, rng);
  Matrix o = u * lambda.asDiagonal() * u.transpose();
  return 0.5 * (o + o.transpose());
}

/// V_T^T (O_A ⊗ I_B) V_T.
inline Matrix matrix_elements_total_basis(const BipartiteSystem& sys, const Matrix& o_a) {
  if (o_a.rows() != sys.dim_a || o_a.cols() != sys.dim_a)
    throw InvalidInput("matrix_elements_total_basis: operator does not match the A factor");
  const Matrix x = apply_left_factor(o_a, sys.dim_b, sys.spec_t.vectors);
  Matrix out = sys.spec_t.vectors.transpose() * x;
  return 0.5 * (out + out.transpose());
}

// ---------------------------------------------------------------------------
// Binning

enum class OmegaSide { absolute, positive, negative };

struct BinningParams {
  double ebar_center = 0.0;
  double ebar_halfwidth = 0.5;
  double omega_bin_width = 0.015;
  OmegaSide side = OmegaSide::absolute;

  void validate() const {
    if (!(ebar_halfwidth > 0.0) || !std::isfinite(ebar_halfwidth))
      throw InvalidInput("binning: Ebar halfwidth must be positive");
    if (!(omega_bin_width > 0.0) || !std::isfinite(omega_bin_width))
      throw InvalidInput("binning: omega bin width must be positive");
  }
};

struct OmegaBin {
  double omega_mid = 0.0;
  double mean_sq = 0.0;
  long count = 0;
  double std_err = 0.0;
  double mean = 0.0;  // signed mean of O_αβ
};

struct BinnedStatistics {
  double ebar_center = 0.0;
  double ebar_halfwidth = 0.5;
  double omega_bin_width = 0.015;
  std::vector<OmegaBin> bins;  // non-empty bins only, ascending ω
};

/// Running per-bin sums. Merging is plain addition, so merging partial
/// accumulators in a fixed order gives a fixed result.
class BinAccumulator {
public:
  BinAccumulator() = default;
  BinAccumulator(double bin_width, std::size_t nbins)
      : width_(bin_width), sum_(nbins, 0.0), sumsq_(nbins, 0.0), signed_(nbins, 0.0), count_(nbins, 0) {}

  void add(double abs_omega, double value) {
    const auto b = static_cast<std::size_t>(abs_omega / width_);
    if (b >= count_.size()) return;
    const double v2 = value * value;
    sum_[b] += v2;
    sumsq_[b] += v2 * v2;
    signed_[b] += value;
    ++count_[b];
  }

  void merge(const BinAccumulator& o) {
    if (o.count_.size() != count_.size()) throw InvalidInput("BinAccumulator::merge: incompatible binning");
    for (std::size_t b = 0; b < count_.size(); ++b) {
      sum_[b] += o.sum_[b];
      sumsq_[b] += o.sumsq_[b];
      signed_[b] += o.signed_[b];
      count_[b] += o.count_[b];
    }
  }

  long total_count() const {
    long n = 0;
    for (long c : count_) n += c;
    return n;
  }

  BinnedStatistics finish(const BinningParams& p) const {
    BinnedStatistics out{p.ebar_center, p.ebar_halfwidth, width_, {}};
    for (std::size_t b = 0; b < count_.size(); ++b) {
      if (count_[b] == 0) continue;
      const double n = static_cast<double>(count_[b]);
      OmegaBin bin;
      bin.omega_mid = (static_cast<double>(b) + 0.5) * width_;
      bin.count = count_[b];
      bin.mean_sq = sum_[b] / n;
      bin.mean = signed_[b] / n;
      if (count_[b] > 1) {
        const double var = std::max(0.0, (sumsq_[b] - n * bin.mean_sq * bin.mean_sq) / (n - 1.0));
        bin.std_err = std::sqrt(var / n);
      }
      out.bins.push_back(bin);
    }
    return out;
  }

private:
  double width_ = 1.0;
  std::vector<double> sum_, sumsq_, signed_;
  std::vector<long> count_;
};

namespace detail {

inline std::size_t bin_count_for(const Vector& energies, double width) {
  const double span = energies.maxCoeff() - energies.minCoeff();
  return static_cast<std::size_t>(std::floor(0.5 * span / width)) + 1;
}

/// Whether the ordered pair (α, β) contributes, and the ω it lands at.
inline bool pair_selected(const BinningParams& p, double e_alpha, double e_beta, double& abs_omega) {
  const double ebar = 0.5 * (e_alpha + e_beta);
  if (ebar < p.ebar_center - p.ebar_halfwidth || ebar > p.ebar_center + p.ebar_halfwidth) return false;
  const double omega = 0.5 * (e_alpha - e_beta);
  abs_omega = std::abs(omega);
  return true;
}

}  // namespace detail

/// Bins |O_αβ|² over pairs α ≠ β with Ē_αβ in the closed window, by |ω_αβ|.
/// With side = absolute each unordered pair is counted once; positive and
/// negative select the ordered pairs with ω > 0 or ω < 0.
inline BinAccumulator accumulate_offdiagonal(const Matrix& elements, const Vector& energies, const BinningParams& p) {
  p.validate();
  const Index n = energies.size();
  if (elements.rows() != n || elements.cols() != n)
    throw InvalidInput("bin_offdiagonal: element matrix does not match the spectrum");
  BinAccumulator acc(p.omega_bin_width, detail::bin_count_for(energies, p.omega_bin_width));
  for (Index b = 0; b < n; ++b)
    for (Index a = 0; a < n; ++a) {
      if (a == b) continue;
      double w = 0.0;
      if (!detail::pair_selected(p, energies(a), energies(b), w)) continue;
      const double omega = 0.5 * (energies(a) - energies(b));
      bool take = false;
      switch (p.side) {
        case OmegaSide::absolute: take = a < b; break;
        case OmegaSide::positive: take = omega > 0.0 || (omega == 0.0 && a < b); break;
        case OmegaSide::negative: take = omega < 0.0 || (omega == 0.0 && a > b); break;
      }
      if (take) acc.add(w, elements(a, b));
    }
  return acc;
}

inline BinnedStatistics bin_offdiagonal(const Matrix& elements, const Spectrum& spectrum, const BinningParams& p) {
  BinAccumulator acc = accumulate_offdiagonal(elements, spectrum.values, p);
  if (acc.total_count() == 0) {
    std::ostringstream os;
    os << "bin_offdiagonal: no eigenvalue pairs with Ebar in [" << p.ebar_center - p.ebar_halfwidth << ", "
       << p.ebar_center + p.ebar_halfwidth << "]";
    throw InvalidInput(os.str());
  }
  return acc.finish(p);
}

/// Evaluates only those matrix elements whose pair lies in the Ē window,
/// using rectangular GEMM blocks over the sorted spectrum.
class WindowedElements {
public:
  WindowedElements(const BipartiteSystem& sys, const BinningParams& p, Index block = 128)
      : sys_(&sys), params_(p), block_(block) {
    p.validate();
    const Vector& e = sys.spec_t.values;
    const double lo = 2.0 * (p.ebar_center - p.ebar_halfwidth);
    const double hi = 2.0 * (p.ebar_center + p.ebar_halfwidth);
    const Index n = e.size();
    const double* first = e.data();
    const double* last = e.data() + n;
    for (Index a0 = 0; a0 < n; a0 += block_) {
      const Index a1 = std::min(n, a0 + block_);
      // β > α and E_α + E_β ∈ [lo, hi]
      const auto b0 = static_cast<Index>(std::lower_bound(first, last, lo - e(a1 - 1)) - first);
      const auto b1 = static_cast<Index>(std::upper_bound(first, last, hi - e(a0)) - first);
      const Index start = std::max(b0, a0 + 1);
      if (b1 > start) tiles_.push_back({a0, a1, start, b1});
    }
    nbins_ = detail::bin_count_for(e, p.omega_bin_width);
  }

  std::size_t bin_count() const { return nbins_; }

  /// Accumulates one operator's in-window unordered pairs.
  BinAccumulator accumulate(const Matrix& o_a) const {
    const BipartiteSystem& sys = *sys_;
    const Matrix& v = sys.spec_t.vectors;
    const Vector& e = sys.spec_t.values;
    const Matrix x = apply_left_factor(o_a, sys.dim_b, v);
    BinAccumulator acc(params_.omega_bin_width, nbins_);
    Matrix tile;
    for (const auto& t : tiles_) {
      tile.noalias() = v.middleCols(t.a0, t.a1 - t.a0).transpose() * x.middleCols(t.b0, t.b1 - t.b0);
      for (Index bj = 0; bj < t.b1 - t.b0; ++bj) {
        const Index beta = t.b0 + bj;
        for (Index ai = 0; ai < t.a1 - t.a0; ++ai) {
          const Index alpha = t.a0 + ai;
          if (alpha >= beta) break;
          double w = 0.0;
          if (detail::pair_selected(params_, e(alpha), e(beta), w)) acc.add(w, tile(ai, bj));
        }
      }
    }
    return acc;
  }

private:
  struct Tile {
    Index a0, a1, b0, b1;
  };
  const BipartiteSystem* sys_;
  BinningParams params_;
  Index block_;
  std::vector<Tile> tiles_;
  std::size_t nbins_ = 0;
};

/// Runs `work(index)` for index in [0, count) on up to `threads` workers.
/// Results are stored by index so callers can reduce in a fixed order.
template <class T, class F>
std::vector<T> parallel_map(int count, int threads, F work) {
  std::vector<T> out(static_cast<std::size_t>(count));
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = work(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < count; i += threads) out[static_cast<std::size_t>(i)] = work(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Ensemble-averaged binned |O_αβ|² for an operator ensemble on factor A.
inline BinnedStatistics ensemble_offdiagonal(const BipartiteSystem& sys, const OperatorEnsembleSpec& ops,
                                             const BinningParams& p, int threads = 1) {
  ops.validate();
  if (ops.dim_a != sys.dim_a) throw InvalidInput("ensemble_offdiagonal: operator dimension does not match the system");
  const WindowedElements win(sys, p);
  auto parts = parallel_map<BinAccumulator>(ops.count, threads,
                                            [&](int k) { return win.accumulate(sample_local_operator(ops, k)); });
  BinAccumulator total = parts.front();
  for (std::size_t k = 1; k < parts.size(); ++k) total.merge(parts[k]);
  if (total.total_count() == 0) {
    std::ostringstream os;
    os << "bin_offdiagonal: no eigenvalue pairs with Ebar in [" << p.ebar_center - p.ebar_halfwidth << ", "
       << p.ebar_center + p.ebar_halfwidth << "]";
    throw InvalidInput(os.str());
  }
  return total.finish(p);
}

// ---------------------------------------------------------------------------
// Diagonal elements

/// (O_A ⊗ I) diagonal in the total eigenbasis for the states α in [lo, hi).
inline Vector diagonal_elements(const BipartiteSystem& sys, const Matrix& o_a, Index lo, Index hi) {
  const Matrix& v = sys.spec_t.vectors;
  const Matrix x = apply_left_factor(o_a, sys.dim_b, v.middleCols(lo, hi - lo));
  return v.middleCols(lo, hi - lo).cwiseProduct(x).colwise().sum().transpose();
}

// ---------------------------------------------------------------------------
// Banding

/// ω = (E_j - E_i)/2 for every pair i < j of an ascending spectrum.
inline std::vector<double> spectral_gaps(const Vector& e_a) {
  std::vector<double> out;
  for (Index i = 0; i < e_a.size(); ++i)
    for (Index j = i + 1; j < e_a.size(); ++j) out.push_back(0.5 * std::abs(e_a(j) - e_a(i)));
  std::sort(out.begin(), out.end());
  return out;
}

struct BandPeak {
  double omega = 0.0;
  double mean_sq = 0.0;
  double prominence = 0.0;
  double nearest_gap = 0.0;
  bool matched = false;
};

struct BandReport {
  std::vector<BandPeak> peaks;
  double threshold = 0.0;  // minimum prominence
  double tolerance = 0.0;  // match distance, 2σ_S
  std::size_t matched = 0;

  double matched_fraction() const {
    return peaks.empty() ? 0.0 : static_cast<double>(matched) / static_cast<double>(peaks.size());
  }
};

/// Interior local maxima of mean_sq(ω) whose topographic prominence is at
/// least twice the median standard error, matched against spectral gaps.
/// Only bins with omega_mid <= omega_max take part.
inline BandReport detect_bands(const BinnedStatistics& binned, const std::vector<double>& gaps, double sigma_s,
                               double omega_max = std::numeric_limits<double>::infinity()) {
  std::vector<OmegaBin> b;
  for (const auto& x : binned.bins)
    if (x.omega_mid <= omega_max) b.push_back(x);
  if (b.size() < 3) throw InvalidInput("detect_bands: need at least 3 bins to find local maxima");
  if (!(sigma_s >= 0.0)) throw InvalidInput("detect_bands: sigma_S must be >= 0");
  std::vector<double> se;
  for (const auto& x : b) se.push_back(x.std_err);
  std::nth_element(se.begin(), se.begin() + static_cast<long>(se.size() / 2), se.end());
  BandReport rep;
  rep.threshold = 2.0 * se[se.size() / 2];
  rep.tolerance = 2.0 * sigma_s;
  const std::size_t n = b.size();
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double y = b[k].mean_sq;
    if (!(y > b[k - 1].mean_sq && y >= b[k + 1].mean_sq)) continue;
    // lowest point on each side before reaching higher ground
    double left_min = y, right_min = y;
    for (std::size_t j = k; j-- > 0;) {
      if (b[j].mean_sq > y) break;
      left_min = std::min(left_min, b[j].mean_sq);
    }
    for (std::size_t j = k + 1; j < n; ++j) {
      if (b[j].mean_sq > y) break;
      right_min = std::min(right_min, b[j].mean_sq);
    }
    const double prominence = y - std::max(left_min, right_min);
    if (prominence < rep.threshold) continue;
    BandPeak pk{b[k].omega_mid, y, prominence, std::numeric_limits<double>::quiet_NaN(), false};
    double best = std::numeric_limits<double>::infinity();
    for (double g : gaps)
      if (std::abs(g - pk.omega) < best) {
        best = std::abs(g - pk.omega);
        pk.nearest_gap = g;
      }
    pk.matched = best <= rep.tolerance;
    if (pk.matched) ++rep.matched;
    rep.peaks.push_back(pk);
  }
  return rep;
}

}  // namespace ethloc
