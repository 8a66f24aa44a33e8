#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ethloc/ansatz.hpp"
#include "ethloc/random.hpp"
#include "support.hpp"

namespace ethloc {
namespace {

using detail::as_span;

double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (int k = 1; k < n; ++k) s += f(a + k * h);
  return s * h;
}

Vector sorted_sums(const Vector& a, const Vector& b) {
  Vector s(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i)
    for (Index j = 0; j < b.size(); ++j) s(i * b.size() + j) = a(i) + b(j);
  std::sort(s.data(), s.data() + s.size());
  return s;
}

Vector linspace(double lo, double hi, Index n) { return Vector::LinSpaced(n, lo, hi); }

Spectrum diagonal_spectrum(const Vector& e) { return {e, Matrix::Identity(e.size(), e.size())}; }

// Hand-built L_A = 1, L_B = 2 spectra for the Monte-Carlo oracles.
struct Toy {
  Vector e_a{{-0.5, 0.7}};
  Vector e_b{{-1.1, -0.2, 0.4, 1.3}};
  Matrix o{{0.3, 1.2}, {1.2, -0.8}};
  Vector e_0 = sorted_sums(e_a, e_b);
};

struct McResult {
  double mean = 0.0, std_err = 0.0;
};

/// E|O_αβ|² for O_A ⊗ I with independent gaussian coefficients whose
/// variances are the given weights per (i, j).
McResult monte_carlo(const Toy& t, const Matrix& var_alpha, const Matrix& var_beta, int draws, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  double sum = 0.0, sumsq = 0.0;
  const Index da = t.e_a.size(), db = t.e_b.size();
  for (int d = 0; d < draws; ++d) {
    Matrix ca(da, db), cb(da, db);
    for (Index i = 0; i < da; ++i)
      for (Index j = 0; j < db; ++j) {
        ca(i, j) = draw_normal(rng, 0.0, std::sqrt(var_alpha(i, j)));
        cb(i, j) = draw_normal(rng, 0.0, std::sqrt(var_beta(i, j)));
      }
    const double v = (ca.transpose() * t.o * cb).trace();
    sum += v * v;
    sumsq += v * v * v * v;
  }
  const double n = draws, mean = sum / n;
  return {mean, std::sqrt((sumsq / n - mean * mean) / n)};
}

TEST(EntropicFactor, Arithmetic) {
  const SpectralDensity n0 = SpectralDensity::flat(-1.0, 1.0, 2000.0);
  EXPECT_NEAR(entropic_factor(n0, 0.0, 1.0), 0.0316228, 1e-7);
  const SpectralDensity doubled = SpectralDensity::flat(-1.0, 1.0, 4000.0);
  EXPECT_NEAR(entropic_factor(doubled, 0.2, 1.0), entropic_factor(n0, 0.2, 1.0) / std::sqrt(2.0), 1e-14);
  EXPECT_THROW(entropic_factor(n0, 3.0, 1.0), InvalidInput);
  EXPECT_THROW(entropic_factor(n0, 0.0, 0.0), InvalidInput);
}

TEST(EntropicFactor, ChainDirectCount) {
  const BipartiteSystem sys = test::chain_system(12, 3);
  const double sigma_s = 0.96;
  const SpectralDensity n0 = density_of_states(sys.energies_0, 64);
  const Index count = detail::count_in(as_span(sys.energies_0), -0.5 * sigma_s, 0.5 * sigma_s);
  const double direct = 1.0 / std::sqrt(static_cast<double>(count));
  EXPECT_NEAR(entropic_factor(n0, 0.0, sigma_s) / direct, 1.0, 0.10);
}

TEST(RmtVariance, Arithmetic) {
  EXPECT_NEAR(rmt_variance(1.0, 4096), 2.44141e-4, 1e-9);
  EXPECT_THROW(rmt_variance(1.0, 0), InvalidInput);
}

TEST(RmtVariance, GoeSimulation) {
  const Index dim = 256;
  Rng rng = make_rng(2024);
  const Spectrum h = eig_sym(sample_goe(dim, rng));
  const OperatorEnsembleSpec ops{50, dim, true, 3};
  double sum = 0.0;
  long n = 0;
  for (int k = 0; k < ops.count; ++k) {
    const Matrix o = h.vectors.transpose() * sample_local_operator(ops, k) * h.vectors;
    for (Index b = 0; b < dim; ++b)
      for (Index a = 0; a < b; ++a) sum += o(a, b) * o(a, b), ++n;
  }
  EXPECT_NEAR(sum / static_cast<double>(n) / rmt_variance(1.0, dim), 1.0, 0.10);
}

TEST(Microcanonical, HardCutoffBeyondDeltaPlusSigmaA) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const BipartiteSystem sys = build_random_system({2, 5, 2, 0.05, seed, 1.0, 13});
    const Matrix o = sample_local_operator({1, sys.dim_a, true, seed}, 0);
    const double sigma_a = sys.spec_a.range();
    const double lo = sys.energies_0(0), hi = sys.energies_0(sys.dim() - 1);
    for (double delta : {0.2, 0.5, 1.0}) {
      int checked = 0;
      for (double ea = lo; ea <= hi; ea += 0.37)
        for (double eb = lo; eb <= hi; eb += 0.41) {
          if (std::abs(ea - eb) <= delta + sigma_a) continue;
          try {
            EXPECT_EQ(f_microcanonical_exact(sys, o, delta, ea, eb), 0.0);
            EXPECT_EQ(f_microcanonical_exact(sys, TypicalOperator{1.0}, delta, ea, eb), 0.0);
            ++checked;
          } catch (const ComputeError&) {
            // an empty window somewhere in a gap of H_0
          }
        }
      EXPECT_GT(checked, 10);
    }
  }
}

TEST(Microcanonical, WideWindowRecoversRandomMatrixResult) {
  const Toy t;
  const double wide = 100.0;
  for (double ea : {-0.3, 0.4})
    for (double eb : {-1.0, 0.9}) {
      const double f = f_microcanonical_exact(as_span(t.e_a), as_span(t.e_b), as_span(t.e_0),
                                              squared_elements(TypicalOperator{1.0}, diagonal_spectrum(t.e_a)), wide,
                                              ea, eb);
      EXPECT_NEAR(f * f, rmt_variance(1.0, 8), 1e-15);
    }
}

TEST(Microcanonical, MonteCarloOracle) {
  const Toy t;
  const double delta = 1.0, ea = 0.15, eb = -0.35;  // no level on a window edge
  auto window = [&](double e) {
    Matrix v = Matrix::Zero(2, 4);
    const Index n = detail::count_in(as_span(t.e_0), e - 0.5 * delta, e + 0.5 * delta);
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 4; ++j)
        if (std::abs(e - t.e_a(i) - t.e_b(j)) <= 0.5 * delta) v(i, j) = 1.0 / static_cast<double>(n);
    return v;
  };
  const McResult mc = monte_carlo(t, window(ea), window(eb), 10000, 11);
  const double f = f_microcanonical_exact(as_span(t.e_a), as_span(t.e_b), as_span(t.e_0), t.o.cwiseAbs2(), delta,
                                          ea, eb);
  EXPECT_GT(f, 0.0);
  EXPECT_NEAR(mc.mean, f * f, 4.0 * mc.std_err);
}

TEST(Microcanonical, EmptyWindowIsComputeError) {
  const Toy t;
  EXPECT_THROW(f_microcanonical_exact(as_span(t.e_a), as_span(t.e_b), as_span(t.e_0), t.o.cwiseAbs2(), 0.01, 10.0,
                                      0.0),
               ComputeError);
  EXPECT_THROW(f_microcanonical_exact(as_span(t.e_a), as_span(t.e_b), as_span(t.e_0), t.o.cwiseAbs2(), -1.0, 0.0,
                                      0.0),
               InvalidInput);
}

TEST(SmoothSums, FlatWindowEqualsMicrocanonical) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const BipartiteSystem sys = build_random_system({2, 4, 2, 0.05, seed, 1.0, 13});
    const Matrix o = sample_local_operator({1, sys.dim_a, true, seed}, 0);
    const ScramblingShape flat{ScramblingForm::flat_window, 0.3};
    for (double ea = -2.0; ea <= 2.0; ea += 0.5)
      for (double eb = -2.0; eb <= 2.0; eb += 0.7) {
        double exact = 0.0;
        try {
          exact = f_microcanonical_exact(sys, o, flat.width(), ea, eb);
        } catch (const ComputeError&) {
          continue;
        }
        EXPECT_NEAR(f_smooth_sums(sys, o, flat, ea, eb), exact, 1e-10);
      }
  }
}

TEST(SmoothSums, MonteCarloOracleExponential) {
  const Toy t;
  const ScramblingShape h{ScramblingForm::exponential, 0.6};
  const double ea = 0.25, eb = -0.6;
  auto weights = [&](double e) {
    Matrix v(2, 4);
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 4; ++j) v(i, j) = h.h(e - t.e_a(i) - t.e_b(j));
    return Matrix(v / v.sum());
  };
  const McResult mc = monte_carlo(t, weights(ea), weights(eb), 10000, 12);
  const double f = f_smooth_sums(as_span(t.e_a), as_span(t.e_b), t.o.cwiseAbs2(), h, ea, eb);
  EXPECT_NEAR(mc.mean, f * f, 4.0 * mc.std_err);
}

TEST(SmoothSums, NonNegativeForTracelessOperator) {
  const Toy t;
  Matrix sq = t.o.cwiseAbs2();
  sq.diagonal().setZero();
  const ScramblingShape h{ScramblingForm::exponential, 0.5};
  const double f = f_smooth_sums(as_span(t.e_a), as_span(t.e_b), sq, h, 0.3, 0.3);
  EXPECT_TRUE(std::isfinite(f));
  EXPECT_GE(f, 0.0);
}

TEST(SmallA, FlatDensityLinearDecay) {
  const double sigma_a = 4.0, sigma_s = 1.0;
  const SpectralDensity rho = SpectralDensity::flat(-2.0, 2.0, 1.0);
  EXPECT_NEAR(f_small_a(rho, 1.0, sigma_s, 0.0), 0.5, 1e-10);
  for (double omega : {0.0, 0.4, 1.1, 1.9}) {
    const double f = f_small_a(rho, 1.3, sigma_s, omega);
    EXPECT_NEAR(f * f, 1.3 * sigma_s / sigma_a * (1.0 - 2.0 * omega / sigma_a), 1e-10);
    EXPECT_NEAR(f_flat_a(sigma_a, 1.3, sigma_s, omega), f, 1e-10);
  }
  EXPECT_EQ(f_small_a(rho, 1.0, sigma_s, 2.01), 0.0);
  EXPECT_EQ(f_flat_a(sigma_a, 1.0, sigma_s, 2.01), 0.0);
}

TEST(Narrow, SymmetricAndCompactlySupported) {
  const SpectralDensity n_a = density_of_states(linspace(-1.0, 1.3, 8), 8);
  const SpectralDensity n_b = density_of_states(eigvals_sym(test::random_symmetric(200, 4)), 32);
  const SpectralDensity n_0 = density_of_states(sorted_sums(linspace(-1.0, 1.3, 8), eigvals_sym(test::random_symmetric(200, 4))), 64);
  for (double omega : {0.1, 0.4, 0.9})
    EXPECT_NEAR(f_narrow(n_a, n_b, n_0, 1.0, 0.5, 0.3, omega), f_narrow(n_a, n_b, n_0, 1.0, 0.5, 0.3, -omega), 1e-9);
  EXPECT_EQ(f_narrow(n_a, n_b, n_0, 1.0, 0.5, 0.0, 0.5 * n_a.range() + 0.05), 0.0);
}

TEST(Narrow, ReducesToSmallAWhenBIsFlat) {
  const Index da = 8;
  const SpectralDensity n_a = SpectralDensity::flat(-1.0, 1.0, static_cast<double>(da));
  const SpectralDensity n_b = SpectralDensity::flat(-50.0, 50.0, 1000.0);
  const SpectralDensity n_0 = SpectralDensity::flat(-60.0, 60.0, 120.0 * 10.0 * static_cast<double>(da));
  const SpectralDensity rho = n_a.fractional();
  for (double omega : {0.0, 0.2, 0.5, 0.8}) {
    const double a = f_narrow(n_a, n_b, n_0, 1.0, 0.7, 0.0, omega);
    const double b = f_small_a(rho, 1.0, 0.7, omega);
    EXPECT_NEAR(a / b, 1.0, 0.01) << omega;
  }
}

class Ladder : public ::testing::TestWithParam<double> {};

TEST_P(Ladder, ExpDecayAndFiniteWidthApproachSmallA) {
  const double sigma_a = GetParam(), sigma_s = sigma_a / 100.0;
  const SpectralDensity rho = SpectralDensity::flat(-0.5 * sigma_a, 0.5 * sigma_a, 1.0);
  for (double x = 0.0; x <= 0.45 + 1e-12; x += 0.05) {
    const double omega = x * sigma_a;
    const double ref = f_small_a(rho, 1.0, sigma_s, omega);
    EXPECT_NEAR(f_exp_decay(sigma_a, sigma_s, 1.0, omega) / ref, 1.0, 0.02) << x;
    EXPECT_NEAR(f_mc_finite_width(rho, 1.0, sigma_a, sigma_s, omega) / ref, 1.0, 0.02) << x;
  }
}

INSTANTIATE_TEST_SUITE_P(Widths, Ladder, ::testing::Values(1.0, 2.0, 7.5));

TEST(ExpDecay, EvenAndMonotoneTail) {
  const double sigma_a = 3.0, sigma_s = 0.8;
  for (double omega : {0.1, 0.7, 1.4, 2.5})
    EXPECT_NEAR(f_exp_decay(sigma_a, sigma_s, 1.0, omega), f_exp_decay(sigma_a, sigma_s, 1.0, -omega), 1e-10);
  double last = f_exp_decay(sigma_a, sigma_s, 1.0, 0.5 * sigma_a);
  for (double omega = 0.5 * sigma_a; omega <= 3.0 * sigma_a; omega += 0.05) {
    const double f = f_exp_decay(sigma_a, sigma_s, 1.0, omega);
    EXPECT_LE(f, last + 1e-12) << omega;
    last = f;
  }
  EXPECT_THROW(f_exp_decay(0.0, 1.0, 1.0, 0.0), InvalidInput);
}

TEST(FiniteWidth, SupportAndTrapezoidOracle) {
  const double sigma_a = 2.0, sigma_s = 0.5;
  const SpectralDensity rho = SpectralDensity::flat(-1.0, 1.0, 1.0);
  const double edge = std::numbers::sqrt3 * sigma_s + 0.5 * sigma_a;
  EXPECT_EQ(f_mc_finite_width(rho, 1.0, sigma_a, sigma_s, edge + 1e-9), 0.0);
  EXPECT_GT(f_mc_finite_width(rho, 1.0, sigma_a, sigma_s, edge - 0.05), 0.0);

  const double w = std::numbers::sqrt3 * sigma_s, omega = 0.0;
  auto integrand = [&](double x) {
    const double y = x * sigma_a;
    const double corr = std::abs(y) <= sigma_a ? (1.0 / sigma_a) * (1.0 - std::abs(y) / sigma_a) : 0.0;
    const double t = 1.0 - std::abs(omega - 0.5 * y) / w;
    return t > 0.0 ? corr * t : 0.0;
  };
  const double oracle = 1.0 * sigma_a / (2.0 * std::numbers::sqrt3) * trapezoid(integrand, -1.0, 1.0, 1000000);
  const double f = f_mc_finite_width(rho, 1.0, sigma_a, sigma_s, omega);
  EXPECT_NEAR(f * f, oracle, 1e-6);
}

TEST(SmoothSmallA, AgreesWithSumsWhenBIsFlat) {
  // a broad equally spaced B spectrum makes n_B constant across A
  const Vector e_a = linspace(-0.6, 0.6, 4);
  const Vector e_b = linspace(-40.0, 40.0, 4001);
  const ScramblingShape h{ScramblingForm::exponential, 0.3};
  const Matrix sq = squared_elements(TypicalOperator{1.0}, diagonal_spectrum(e_a));
  const SpectralDensity n0 = density_of_states(sorted_sums(e_a, e_b), 64);
  for (double omega : {0.0, 0.15, 0.4, 0.9}) {
    const double v = f_smooth_sums(as_span(e_a), as_span(e_b), sq, h, omega, -omega);
    const double ef = entropic_factor(n0, 0.0, h.sigma_s);
    const double f = f_smooth_small_a(as_span(e_a), h, 1.0, omega);
    EXPECT_NEAR(v * v / (ef * ef * f * f), 1.0, 0.02) << omega;
  }
}

struct LadderSystem {
  Spectrum spec_a = diagonal_spectrum(linspace(-1.0, 1.0, 64));
  Vector e_b = linspace(-10.0, 10.0, 512);
  Vector e_0 = sorted_sums(linspace(-1.0, 1.0, 64), linspace(-10.0, 10.0, 512));
};

TEST(ApproximationLadder, TypicalPredictionsAgreeInNarrowRegime) {
  const LadderSystem s;
  const double sigma_a = 2.0, sigma_s = sigma_a / 50.0;
  const AnsatzModel m = AnsatzModel::from_spectra(s.spec_a, s.e_b, s.e_0, sigma_s, TypicalOperator{1.0});
  const AnsatzKind kinds[] = {AnsatzKind::smooth_general_sums, AnsatzKind::narrow_scrambling,
                              AnsatzKind::small_A_narrow, AnsatzKind::mc_finite_width_flat_A};
  for (double omega = 0.0; omega <= 0.25 * sigma_a + 1e-12; omega += 0.05) {
    std::vector<double> f;
    for (AnsatzKind k : kinds) f.push_back(predict_point(m, k, 0.0, omega).f);
    for (std::size_t a = 0; a < f.size(); ++a)
      for (std::size_t b = a + 1; b < f.size(); ++b)
        EXPECT_NEAR(f[a] / f[b], 1.0, 0.10) << omega << " " << to_string(kinds[a]) << " vs " << to_string(kinds[b]);
  }
}

TEST(ApproximationLadder, SumRuleAnchor) {
  // Σ_β E|O_αβ|² from the exact-sums ansatz against Σ_β |O_αβ|² = (O²)_αα
  for (int l_b : {6, 7, 8}) {
    const BipartiteSystem sys = build_random_system({2, l_b, 2, 0.05, 5, 1.0, 13});
    const Matrix o = sample_local_operator({1, sys.dim_a, true, 8}, 0);
    const double delta = ScramblingShape{ScramblingForm::flat_window, profile(compute_coefficients(sys)).sigma_s}.width();
    const Matrix elems = matrix_elements_total_basis(sys, o);
    const double mid = 0.5 * (sys.energies_0(0) + sys.energies_0(sys.dim() - 1));
    double direct = 0.0;
    int states = 0;
    for (Index a = 0; a < sys.dim(); ++a)
      if (std::abs(sys.spec_t.values(a) - mid) <= 0.5) direct += elems.col(a).squaredNorm(), ++states;
    direct /= states;
    double predicted = 0.0;
    for (Index b = 0; b < sys.dim(); ++b) {
      try {
        const double f = f_microcanonical_exact(sys, o, delta, mid, sys.spec_t.values(b));
        predicted += f * f;
      } catch (const ComputeError&) {
      }
    }
    EXPECT_NEAR(predicted / direct, 1.0, 0.15) << "L_B = " << l_b;
  }
}

TEST(Gibbs, IdentityAndInfiniteTemperature) {
  const BipartiteSystem sys = build_random_system({3, 5, 2, 0.05, 2, 1.0, 13});
  const Matrix o = sample_local_operator({1, sys.dim_a, true, 1}, 0);
  EXPECT_NEAR(gibbs_expectation(sys.spec_a, o, 0.0), 0.0, 1e-12);
  for (double beta : {-2.0, 0.0, 0.7, 5.0})
    EXPECT_NEAR(gibbs_expectation(sys.spec_a, Matrix::Identity(sys.dim_a, sys.dim_a), beta), 1.0, 1e-12);
  const Matrix rotated = sys.spec_a.vectors.transpose() * o * sys.spec_a.vectors;
  EXPECT_NEAR(gibbs_expectation(sys.spec_a, o, 200.0), rotated(0, 0), 1e-6);
  EXPECT_NEAR(gibbs_expectation(sys.spec_a, o, -200.0), rotated(sys.dim_a - 1, sys.dim_a - 1), 1e-6);
}

TEST(Gibbs, SymmetricBathAtCentreGivesTrace) {
  // symmetric B spectrum: ln n_B is flat at its centre, so β = 0
  const Vector e_a = linspace(-0.7, 0.9, 4);
  const Vector half = linspace(0.05, 3.0, 60);
  Vector e_b(120);
  e_b << -half.reverse(), half;
  const BipartiteSystem sys = test::toy_system(e_a, e_b, 0.0, 1);
  const Matrix o = sample_local_operator({1, 4, true, 2}, 0);
  const SpectralDensity n_b = density_of_states(e_b, 16);
  EXPECT_NEAR(gibbs_beta(n_b, e_a.mean(), e_a.mean(), 0.05), 0.0, 1e-9);
  EXPECT_NEAR(gibbs_diagonal(sys, n_b, o, e_a.mean()), 0.0, 1e-9);
  EXPECT_NEAR(gibbs_diagonal(sys, n_b, Matrix::Identity(4, 4), 1.0), 1.0, 1e-12);
  EXPECT_THROW(gibbs_diagonal(sys, n_b, o, 50.0), InvalidInput);
}

TEST(Catalogue, NamesRoundTrip) {
  for (AnsatzKind k : all_ansatz_kinds) EXPECT_EQ(parse_ansatz_kind(to_string(k)), k);
  EXPECT_FALSE(parse_ansatz_kind("no_such_kind").has_value());
}

TEST(Catalogue, EveryKindIsNonNegativeEvenAndConsistent) {
  const LadderSystem s;
  const AnsatzModel m = AnsatzModel::from_spectra(s.spec_a, s.e_b, s.e_0, 0.3, TypicalOperator{1.0});
  for (AnsatzKind k : all_ansatz_kinds)
    for (double omega : {0.05, 0.3, 0.8, 1.4}) {
      const PredictionPoint plus = predict_point(m, k, 0.2, omega);
      const PredictionPoint minus = predict_point(m, k, 0.2, -omega);
      EXPECT_GE(plus.f, 0.0);
      EXPECT_NEAR(plus.variance, plus.entropic_factor * plus.entropic_factor * plus.f * plus.f,
                  1e-12 * std::max(1e-30, plus.variance));
      EXPECT_NEAR(plus.f, minus.f, 1e-6 * std::max(1e-12, plus.f)) << to_string(k) << " " << omega;
    }
}

TEST(Catalogue, PredictSkipsPointsOutsideSupport) {
  const LadderSystem s;
  const AnsatzModel m = AnsatzModel::from_spectra(s.spec_a, s.e_b, s.e_0, 0.3, TypicalOperator{1.0});
  const std::vector<double> omegas{0.1, 0.5, 30.0};
  const Prediction p = predict(m, AnsatzKind::exp_decay_flat_A, 0.0, omegas);
  EXPECT_EQ(p.points.size(), 3u);  // exp_decay does not touch densities beyond the entropic factor
  const Prediction q = predict(m, AnsatzKind::narrow_scrambling, 0.0, omegas);
  EXPECT_EQ(q.points.size(), 2u);
}

TEST(Catalogue, ConcreteOperatorOverridesTypical) {
  const LadderSystem s;
  Matrix o = Matrix::Zero(64, 64);
  o.diagonal().setConstant(1.0);
  const AnsatzModel m = AnsatzModel::from_spectra(s.spec_a, s.e_b, s.e_0, 0.3, o);
  EXPECT_DOUBLE_EQ(m.o2bar, 1.0);
  // the identity has no off-diagonal weight in the A basis
  EXPECT_EQ(m.sq_elements(0, 1), 0.0);
  EXPECT_THROW(AnsatzModel::from_spectra(s.spec_a, s.e_b, s.e_0, 0.3, Matrix(Matrix::Identity(3, 3))), InvalidInput);
}

}  // namespace
}  // namespace ethloc
