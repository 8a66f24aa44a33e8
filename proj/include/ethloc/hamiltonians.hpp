#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>

#include "ethloc/error.hpp"
#include "ethloc/linalg.hpp"
#include "ethloc/random.hpp"

namespace ethloc {

/// H = J Σ_{r<L} Z_r Z_{r+1} + Σ_r (h_x X_r + h_z Z_r), open boundaries.
struct SpinChainParams {
  int L = 12;
  double J = 1.0;
  double h_x = 1.05;
  double h_z = 0.5;
  int max_L = 13;  // dense-diagonalization guard

  void validate() const {
    if (L < 1) throw InvalidInput("spin chain: L must be >= 1");
    if (L > max_L) {
      std::ostringstream os;
      os << "spin chain: L = " << L << " exceeds the dense-diagonalization limit " << max_L;
      throw InvalidInput(os.str());
    }
    if (!std::isfinite(J) || !std::isfinite(h_x) || !std::isfinite(h_z))
      throw InvalidInput("spin chain: couplings must be finite");
  }
};

/// Two GOE-spectrum factors coupled by a conjugated GOE term on L_I qubits
/// straddling the cut.
struct RandomSystemParams {
  int L_A = 2;
  int L_B = 9;
  int L_I = 2;
  double f = 0.01;  // ||H_I|| / ||H_0||
  std::uint64_t seed = 1;
  double a_scale = 1.0;  // multiplies the sampled H_A spectrum
  int max_qubits = 13;

  int floor_half() const { return L_I / 2; }
  int ceil_half() const { return L_I - L_I / 2; }

  void validate() const {
    if (L_A < 1 || L_B < 1) throw InvalidInput("random system: L_A and L_B must be >= 1");
    if (L_A + L_B > max_qubits) throw InvalidInput("random system: L_A + L_B exceeds the dense-diagonalization limit");
    if (L_I < 1) throw InvalidInput("random system: L_I must be >= 1");
    if (floor_half() > L_A || ceil_half() > L_B) {
      std::ostringstream os;
      os << "random system: interaction support L_I = " << L_I << " does not fit across the cut (L_A = " << L_A
         << ", L_B = " << L_B << ")";
      throw InvalidInput(os.str());
    }
    if (!(f >= 0.0) || !std::isfinite(f)) throw InvalidInput("random system: f must be finite and >= 0");
    if (!(a_scale > 0.0)) throw InvalidInput("random system: a_scale must be positive");
  }
};

/// H_T = H_A ⊗ I + I ⊗ H_B + H_I together with the eigendata of every piece.
/// H_0's eigenvectors are products of factor eigenvectors and are only
/// materialised on request.
struct BipartiteSystem {
  Index dim_a = 0;
  Index dim_b = 0;
  Matrix h_a, h_b, h_i, h_t;
  Spectrum spec_a, spec_b, spec_t;
  Vector energies_0;  // ascending E_i^A + E_j^B
  double interaction_norm = 0.0;

  Index dim() const { return dim_a * dim_b; }

  Matrix h0() const {
    return kron(h_a, Matrix::Identity(dim_b, dim_b)) + kron(Matrix::Identity(dim_a, dim_a), h_b);
  }

  /// Product eigenbasis of H_0, columns ordered by ascending energy.
  Spectrum h0_spectrum() const {
    const Index n = dim();
    Vector sums(n);
    for (Index i = 0; i < dim_a; ++i)
      for (Index j = 0; j < dim_b; ++j) sums(i * dim_b + j) = spec_a.values(i) + spec_b.values(j);
    const auto order = argsort(sums);
    Spectrum s{Vector(n), Matrix(n, n)};
    for (Index k = 0; k < n; ++k) {
      const Index p = order[static_cast<std::size_t>(k)];
      s.values(k) = sums(p);
      const Index i = p / dim_b, j = p % dim_b;
      for (Index a = 0; a < dim_a; ++a) s.vectors.col(k).segment(a * dim_b, dim_b) = spec_a.vectors(a, i) * spec_b.vectors.col(j);
    }
    return s;
  }
};

namespace detail {

inline int bit_of(Index state, int site, int L) { return static_cast<int>((state >> (L - site)) & 1); }

inline double z_sign(Index state, int site, int L) { return bit_of(state, site, L) ? -1.0 : 1.0; }

inline bool is_diagonal(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

inline double norm_of(const Matrix& m) {
  if (is_diagonal(m)) return m.diagonal().cwiseAbs().maxCoeff();
  return operator_norm_sym(m);
}

}  // namespace detail

/// Dense 2^L matrix in the σ_z product basis; site 1 is the most significant
/// bit and |0> has Z = +1.
inline Matrix build_spin_chain(const SpinChainParams& p) {
  p.validate();
  const int L = p.L;
  const Index n = Index{1} << L;
  Matrix h = Matrix::Zero(n, n);
  for (Index s = 0; s < n; ++s) {
    double diag = 0.0;
    for (int r = 1; r < L; ++r) diag += p.J * detail::z_sign(s, r, L) * detail::z_sign(s, r + 1, L);
    for (int r = 1; r <= L; ++r) {
      diag += p.h_z * detail::z_sign(s, r, L);
      const Index flipped = s ^ (Index{1} << (L - r));
      h(flipped, s) += p.h_x;
    }
    h(s, s) += diag;
  }
  return h;
}

/// Completes a BipartiteSystem from its pieces. `total` may carry a
/// precomputed (e.g. cached) spectrum of H_T; `known_norm` the operator norm
/// of H_I when it is known analytically.
inline BipartiteSystem assemble_system(Matrix h_a, Matrix h_b, Matrix h_i, std::optional<Spectrum> total = {},
                                       std::optional<double> known_norm = {}) {
  require_symmetric(h_a);
  require_symmetric(h_b);
  BipartiteSystem sys;
  sys.dim_a = h_a.rows();
  sys.dim_b = h_b.rows();
  if (h_i.rows() != sys.dim() || h_i.cols() != sys.dim())
    throw InvalidInput("assemble_system: interaction term has the wrong dimension");
  sys.h_a = std::move(h_a);
  sys.h_b = std::move(h_b);
  sys.h_i = std::move(h_i);
  sys.h_t = sys.h0() + sys.h_i;
  sys.spec_a = eig_sym(sys.h_a);
  sys.spec_b = eig_sym(sys.h_b);
  if (total) {
    if (total->dim() != sys.dim()) throw InvalidInput("assemble_system: supplied H_T spectrum has the wrong dimension");
    sys.spec_t = std::move(*total);
  } else if (sys.h_i.isZero(0.0)) {
    sys.spec_t = sys.h0_spectrum();
  } else {
    sys.spec_t = eig_sym(sys.h_t);
  }
  Vector sums(sys.dim());
  for (Index i = 0; i < sys.dim_a; ++i)
    for (Index j = 0; j < sys.dim_b; ++j) sums(i * sys.dim_b + j) = sys.spec_a.values(i) + sys.spec_b.values(j);
  std::sort(sums.data(), sums.data() + sums.size());
  sys.energies_0 = std::move(sums);
  sys.interaction_norm = known_norm ? *known_norm : detail::norm_of(sys.h_i);
  return sys;
}

/// Cuts the chain between sites L_A and L_A+1: H_A and H_B are the chain
/// restricted to either side, H_I = J Z_{L_A} Z_{L_A+1}.
inline BipartiteSystem decompose_chain(const SpinChainParams& p, int cut, std::optional<Spectrum> total = {}) {
  p.validate();
  if (cut < 1 || cut >= p.L) {
    std::ostringstream os;
    os << "decompose_chain: cut L_A = " << cut << " must satisfy 1 <= L_A < L = " << p.L;
    throw InvalidInput(os.str());
  }
  SpinChainParams pa = p, pb = p;
  pa.L = cut;
  pb.L = p.L - cut;
  Matrix h_a = build_spin_chain(pa);
  Matrix h_b = build_spin_chain(pb);
  const Index n = Index{1} << p.L;
  Matrix h_i = Matrix::Zero(n, n);
  for (Index s = 0; s < n; ++s) h_i(s, s) = p.J * detail::z_sign(s, cut, p.L) * detail::z_sign(s, cut + 1, p.L);
  return assemble_system(std::move(h_a), std::move(h_b), std::move(h_i), std::move(total), std::abs(p.J));
}

/// Random bipartite system. Draw order from the single seed:
/// GOE(H_A), GOE(H_B), GOE(H_{L_I}), Haar(O_A), Haar(O_B).
inline BipartiteSystem build_random_system(const RandomSystemParams& p, std::optional<Spectrum> total = {}) {
  p.validate();
  Rng rng = make_rng(p.seed);
  const Index dim_a = Index{1} << p.L_A;
  const Index dim_b = Index{1} << p.L_B;
  const Index dim_i = Index{1} << p.L_I;
  const Vector ea = eigvals_sym(sample_goe(dim_a, rng)) * p.a_scale;
  const Vector eb = eigvals_sym(sample_goe(dim_b, rng));
  const Vector ei = eigvals_sym(sample_goe(dim_i, rng));
  const Matrix o_a = haar_orthogonal(dim_a, rng);
  const Matrix o_b = haar_orthogonal(dim_b, rng);

  const double h0_norm = std::max(std::abs(ea.maxCoeff() + eb.maxCoeff()), std::abs(ea.minCoeff() + eb.minCoeff()));
  const double hi_raw = ei.cwiseAbs().maxCoeff();
  const double scale = (p.f == 0.0 || hi_raw == 0.0) ? 0.0 : p.f * h0_norm / hi_raw;

  // diag(I_left ⊗ H_{L_I} ⊗ I_right) with the support straddling the cut
  const Index right = Index{1} << (p.L_B - p.ceil_half());
  const Index n = dim_a * dim_b;
  Vector d(n);
  for (Index s = 0; s < n; ++s) d(s) = scale * ei((s / right) % dim_i);

  Matrix h_i = Matrix::Zero(n, n);
  if (scale != 0.0) {
    const Matrix u = kron(o_a, o_b);
    h_i.noalias() = u * d.asDiagonal() * u.transpose();
    h_i = 0.5 * (h_i + h_i.transpose()).eval();
  }
  const double norm = scale * hi_raw;
  return assemble_system(Matrix(ea.asDiagonal()), Matrix(eb.asDiagonal()), std::move(h_i), std::move(total), norm);
}

}  // namespace ethloc
