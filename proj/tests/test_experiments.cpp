#include "support.hpp"

namespace ethloc {
namespace {

using test::random_symmetric;
using test::toy_system;

BipartiteSystem small_system(double coupling = 0.05, std::uint64_t seed = 3) {
  Rng rng = make_rng(seed);
  Vector e_a(4), e_b(48);
  for (Index k = 0; k < e_a.size(); ++k) e_a(k) = draw_uniform(rng, -1.0, 1.0);
  for (Index k = 0; k < e_b.size(); ++k) e_b(k) = draw_uniform(rng, -3.0, 3.0);
  return toy_system(e_a, e_b, coupling, seed + 100);
}

OperatorEnsembleSpec ops_for(const BipartiteSystem& sys, int count, std::uint64_t seed = 7) {
  OperatorEnsembleSpec o;
  o.count = count;
  o.dim_a = sys.dim_a;
  o.seed = seed;
  return o;
}

TEST(LocalOperator, TracelessAndUnitMeanSquare) {
  OperatorEnsembleSpec spec;
  spec.count = 20;
  spec.dim_a = 8;
  for (int k = 0; k < spec.count; ++k) {
    const Matrix o = sample_local_operator(spec, k);
    EXPECT_NEAR(o.trace(), 0.0, 1e-12);
    EXPECT_NEAR((o * o).trace() / 8.0, 1.0, 1e-12);
    EXPECT_LE((o - o.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(LocalOperator, DeterministicPerIndex) {
  OperatorEnsembleSpec spec;
  spec.count = 5;
  const Matrix a = sample_local_operator(spec, 3);
  const Matrix b = sample_local_operator(spec, 3);
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT((a - sample_local_operator(spec, 2)).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_THROW(sample_local_operator(spec, 5), InvalidInput);
  spec.dim_a = 1;
  EXPECT_THROW(sample_local_operator(spec, 0), InvalidInput);
}

// Haar rotation of a traceless spectrum with sum λ² = d gives
// E|O_ij|² = d / ((d-1)(d+2)) off the diagonal; the mean over all d² entries is 1/d exactly.
TEST(LocalOperator, TypicalElementsMatchHaarMoments) {
  OperatorEnsembleSpec spec;
  spec.count = 250;
  spec.dim_a = 8;
  const double d = 8.0;
  std::vector<double> per_op;
  for (int k = 0; k < spec.count; ++k) {
    const Matrix o = sample_local_operator(spec, k);
    EXPECT_NEAR(o.squaredNorm() / (d * d), 1.0 / d, 1e-12);
    double s = 0.0;
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 8; ++j)
        if (i != j) s += o(i, j) * o(i, j);
    per_op.push_back(s / (d * (d - 1.0)));
  }
  double mean = 0.0, var = 0.0;
  for (double x : per_op) mean += x;
  mean /= per_op.size();
  for (double x : per_op) var += (x - mean) * (x - mean);
  const double se = std::sqrt(var / (per_op.size() - 1.0) / per_op.size());
  EXPECT_NEAR(mean, d / ((d - 1.0) * (d + 2.0)), 3.0 * se);
}

TEST(TotalBasis, IdentityAndNorm) {
  const BipartiteSystem sys = small_system();
  const Matrix id = matrix_elements_total_basis(sys, Matrix::Identity(sys.dim_a, sys.dim_a));
  EXPECT_LE((id - Matrix::Identity(id.rows(), id.cols())).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix o = sample_local_operator(ops_for(sys, 1), 0);
  const Matrix m = matrix_elements_total_basis(sys, o);
  EXPECT_NEAR(m.squaredNorm(), static_cast<double>(sys.dim_b) * o.squaredNorm(), 1e-9);
  EXPECT_THROW(matrix_elements_total_basis(sys, Matrix::Identity(3, 3)), InvalidInput);
}

TEST(TotalBasis, UncoupledSystemOnlyConnectsSameBathState) {
  const BipartiteSystem sys = small_system(0.0);
  const Matrix o = sample_local_operator(ops_for(sys, 1), 0);
  const Matrix m = matrix_elements_total_basis(sys, o);
  const Matrix& v = sys.spec_t.vectors;
  std::vector<Index> bath(static_cast<std::size_t>(v.cols()));
  for (Index a = 0; a < v.cols(); ++a) {
    Index row = 0;
    v.col(a).cwiseAbs().maxCoeff(&row);
    EXPECT_NEAR(std::abs(v(row, a)), 1.0, 1e-12);
    bath[static_cast<std::size_t>(a)] = row % sys.dim_b;
  }
  for (Index a = 0; a < m.rows(); ++a)
    for (Index b = 0; b < m.cols(); ++b)
      if (bath[static_cast<std::size_t>(a)] != bath[static_cast<std::size_t>(b)]) {
        EXPECT_LE(std::abs(m(a, b)), 1e-12);
      }
}

TEST(SumRule, RowSumsEqualSquareDiagonal) {
  const BipartiteSystem sys = small_system();
  const auto spec = ops_for(sys, 4);
  double total = 0.0;
  for (int k = 0; k < spec.count; ++k) {
    const Matrix o = sample_local_operator(spec, k);
    const Matrix m = matrix_elements_total_basis(sys, o);
    const Matrix sq = matrix_elements_total_basis(sys, o * o);
    for (Index a = 0; a < m.rows(); ++a) EXPECT_NEAR(m.row(a).squaredNorm(), sq(a, a), 1e-8);
    total += sq.trace() / static_cast<double>(sq.rows());
  }
  EXPECT_NEAR(total / spec.count, 1.0, 1e-10);
}

TEST(Binning, IdentityHasNoOffDiagonalWeight) {
  const BipartiteSystem sys = small_system();
  const Matrix id = matrix_elements_total_basis(sys, Matrix::Identity(sys.dim_a, sys.dim_a));
  BinningParams p;
  p.ebar_halfwidth = 1.0;
  p.omega_bin_width = 0.1;
  const BinnedStatistics b = bin_offdiagonal(id, sys.spec_t, p);
  ASSERT_FALSE(b.bins.empty());
  for (const auto& bin : b.bins) EXPECT_LE(bin.mean_sq, 1e-24);
}

TEST(Binning, SinglePair) {
  Spectrum s;
  s.values = Vector::LinSpaced(2, -0.32, 0.32);
  s.vectors = Matrix::Identity(2, 2);
  Matrix m(2, 2);
  m << 0.0, 0.7, 0.7, 0.0;
  BinningParams p;
  p.omega_bin_width = 0.1;
  const BinnedStatistics b = bin_offdiagonal(m, s, p);
  ASSERT_EQ(b.bins.size(), 1u);
  EXPECT_EQ(b.bins[0].count, 1);
  EXPECT_NEAR(b.bins[0].mean_sq, 0.49, 1e-15);
  EXPECT_NEAR(b.bins[0].omega_mid, 0.35, 1e-15);
  p.ebar_center = 5.0;
  EXPECT_THROW(bin_offdiagonal(m, s, p), InvalidInput);
  p.omega_bin_width = 0.0;
  EXPECT_THROW(bin_offdiagonal(m, s, p), InvalidInput);
}

TEST(Binning, PositiveAndNegativeSidesMirror) {
  const BipartiteSystem sys = small_system();
  const Matrix m = matrix_elements_total_basis(sys, sample_local_operator(ops_for(sys, 1), 0));
  BinningParams p;
  p.omega_bin_width = 0.05;
  p.side = OmegaSide::positive;
  const BinnedStatistics pos = bin_offdiagonal(m, sys.spec_t, p);
  p.side = OmegaSide::negative;
  const BinnedStatistics neg = bin_offdiagonal(m, sys.spec_t, p);
  p.side = OmegaSide::absolute;
  const BinnedStatistics abs = bin_offdiagonal(m, sys.spec_t, p);
  ASSERT_EQ(pos.bins.size(), neg.bins.size());
  ASSERT_EQ(pos.bins.size(), abs.bins.size());
  for (std::size_t k = 0; k < pos.bins.size(); ++k) {
    EXPECT_EQ(pos.bins[k].count, neg.bins[k].count);
    EXPECT_NEAR(pos.bins[k].mean_sq, neg.bins[k].mean_sq, 1e-14);
    EXPECT_NEAR(pos.bins[k].mean_sq, abs.bins[k].mean_sq, 1e-14);
  }
}

TEST(Binning, SignedMeanVanishes) {
  const BipartiteSystem sys = test::chain_system(10, 3);
  OperatorEnsembleSpec spec = ops_for(sys, 10);
  BinningParams p;
  p.omega_bin_width = 0.25;
  const BinnedStatistics b = ensemble_offdiagonal(sys, spec, p);
  int checked = 0, outliers = 0;
  for (const auto& bin : b.bins) {
    if (bin.count < 30) continue;
    const double n = static_cast<double>(bin.count);
    const double se = std::sqrt(std::max(0.0, bin.mean_sq - bin.mean * bin.mean) / (n - 1.0));
    ++checked;
    if (std::abs(bin.mean) > 3.0 * se) ++outliers;
  }
  ASSERT_GT(checked, 20);
  EXPECT_LE(outliers, std::max(1, checked / 50));
}

TEST(Ensemble, WindowedMatchesDirectBinning) {
  const BipartiteSystem sys = small_system();
  const auto spec = ops_for(sys, 3);
  BinningParams p;
  p.omega_bin_width = 0.05;
  BinAccumulator direct;
  for (int k = 0; k < spec.count; ++k) {
    const Matrix m = matrix_elements_total_basis(sys, sample_local_operator(spec, k));
    BinAccumulator acc = accumulate_offdiagonal(m, sys.spec_t.values, p);
    if (k == 0)
      direct = acc;
    else
      direct.merge(acc);
  }
  const BinnedStatistics a = direct.finish(p);
  const BinnedStatistics w = ensemble_offdiagonal(sys, spec, p);
  ASSERT_EQ(a.bins.size(), w.bins.size());
  for (std::size_t k = 0; k < a.bins.size(); ++k) {
    EXPECT_EQ(a.bins[k].count, w.bins[k].count);
    EXPECT_NEAR(a.bins[k].mean_sq, w.bins[k].mean_sq, 1e-12 * (1.0 + a.bins[k].mean_sq));
  }
}

TEST(Ensemble, IndependentOfThreadCount) {
  const BipartiteSystem sys = small_system();
  const auto spec = ops_for(sys, 7);
  BinningParams p;
  p.omega_bin_width = 0.05;
  const BinnedStatistics one = ensemble_offdiagonal(sys, spec, p, 1);
  const BinnedStatistics three = ensemble_offdiagonal(sys, spec, p, 3);
  ASSERT_EQ(one.bins.size(), three.bins.size());
  for (std::size_t k = 0; k < one.bins.size(); ++k) {
    EXPECT_EQ(one.bins[k].mean_sq, three.bins[k].mean_sq);
    EXPECT_EQ(one.bins[k].std_err, three.bins[k].std_err);
  }
  OperatorEnsembleSpec wrong = spec;
  wrong.dim_a = sys.dim_a * 2;
  EXPECT_THROW(ensemble_offdiagonal(sys, wrong, p), InvalidInput);
}

TEST(Diagonal, MatchesFullMatrix) {
  const BipartiteSystem sys = small_system();
  const Matrix o = sample_local_operator(ops_for(sys, 1), 0);
  const Matrix m = matrix_elements_total_basis(sys, o);
  const Vector d = diagonal_elements(sys, o, 10, 60);
  ASSERT_EQ(d.size(), 50);
  for (Index k = 0; k < 50; ++k) EXPECT_NEAR(d(k), m(10 + k, 10 + k), 1e-12);
}

TEST(Bands, SpectralGaps) {
  Vector e(3);
  e << -1.0, 0.0, 2.0;
  const auto g = spectral_gaps(e);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g[0], 0.5);
  EXPECT_DOUBLE_EQ(g[1], 1.0);
  EXPECT_DOUBLE_EQ(g[2], 1.5);
}

BinnedStatistics synthetic(const std::function<double(double)>& f) {
  BinnedStatistics b;
  b.omega_bin_width = 0.1;
  for (int k = 0; k < 40; ++k) {
    OmegaBin bin;
    bin.omega_mid = 0.05 + 0.1 * k;
    bin.mean_sq = f(bin.omega_mid);
    bin.count = 100;
    bin.std_err = 0.001;
    b.bins.push_back(bin);
  }
  return b;
}

TEST(Bands, MonotoneCurveHasNoPeaks) {
  const auto rep = detect_bands(synthetic([](double w) { return std::exp(-w); }), {1.0}, 0.1);
  EXPECT_TRUE(rep.peaks.empty());
  EXPECT_EQ(rep.matched_fraction(), 0.0);
}

TEST(Bands, BumpAtGapIsMatched) {
  const auto f = [](double w) { return std::exp(-w) + 0.2 * std::exp(-std::pow((w - 2.05) / 0.15, 2)); };
  const auto rep = detect_bands(synthetic(f), {0.3, 2.0}, 0.05);
  ASSERT_EQ(rep.peaks.size(), 1u);
  EXPECT_TRUE(rep.peaks[0].matched);
  EXPECT_DOUBLE_EQ(rep.peaks[0].nearest_gap, 2.0);
  EXPECT_EQ(rep.matched_fraction(), 1.0);
  const auto far = detect_bands(synthetic(f), {0.3, 3.5}, 0.05);
  ASSERT_EQ(far.peaks.size(), 1u);
  EXPECT_FALSE(far.peaks[0].matched);
  const auto cut = detect_bands(synthetic(f), {2.0}, 0.05, 1.5);
  EXPECT_TRUE(cut.peaks.empty());
}

TEST(Bands, RejectsTooFewBins) {
  BinnedStatistics b = synthetic([](double w) { return w; });
  b.bins.resize(2);
  EXPECT_THROW(detect_bands(b, {1.0}, 0.1), InvalidInput);
  EXPECT_THROW(detect_bands(synthetic([](double w) { return w; }), {1.0}, -1.0), InvalidInput);
}

}  // namespace
}  // namespace ethloc
