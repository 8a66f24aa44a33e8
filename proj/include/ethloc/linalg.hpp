#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "ethloc/error.hpp"

namespace ethloc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Eigendata of a real symmetric operator: ascending eigenvalues, and the
/// orthogonal matrix whose column k is the eigenvector for eigenvalue k.
struct Spectrum {
  Vector values;
  Matrix vectors;

  Index dim() const { return values.size(); }
  double min() const { return values(0); }
  double max() const { return values(values.size() - 1); }
  double range() const { return max() - min(); }
};

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Throws InvalidInput unless `m` is square, finite, and symmetric to within
/// `rel_tol` of its largest entry.
inline void require_symmetric(const Matrix& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    std::ostringstream os;
    os << "expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw InvalidInput(os.str());
  }
  if (!all_finite(m)) throw InvalidInput("matrix has non-finite entries");
  const double scale = max_abs(m);
  const double asym = max_abs(m - m.transpose());
  if (asym > rel_tol * std::max(scale, 1e-300)) {
    std::ostringstream os;
    os << "matrix is not symmetric: max |A - A^T| = " << asym << " (scale " << scale << ")";
    throw InvalidInput(os.str());
  }
}

/// Flips each column so that its largest-magnitude component is positive.
/// Ties go to the lowest row index.
inline void canonicalize_signs(Matrix& vectors) {
  for (Index k = 0; k < vectors.cols(); ++k) {
    Index arg = 0;
    double best = -1.0;
    for (Index r = 0; r < vectors.rows(); ++r) {
      const double a = std::abs(vectors(r, k));
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (vectors(arg, k) < 0.0) vectors.col(k) *= -1.0;
  }
}

inline Spectrum eig_sym(const Matrix& m) {
  require_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) throw ComputeError("symmetric eigensolver did not converge");
  Spectrum s{solver.eigenvalues(), solver.eigenvectors()};
  canonicalize_signs(s.vectors);
  return s;
}

/// Eigenvalues only; cheaper when vectors are not needed.
inline Vector eigvals_sym(const Matrix& m) {
  require_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ComputeError("symmetric eigensolver did not converge");
  return solver.eigenvalues();
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Largest-magnitude eigenvalue of a symmetric matrix.
inline double operator_norm_sym(const Matrix& m) {
  const Vector ev = eigvals_sym(m);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Computes (op ⊗ I_b) · x for x with op.rows() * dim_b rows. The left
/// tensor slot is the most significant index of a row.
inline Matrix apply_left_factor(const Matrix& op, Index dim_b, const Matrix& x) {
  const Index dim_a = op.rows();
  if (op.cols() != dim_a || dim_a * dim_b != x.rows())
    throw InvalidInput("apply_left_factor: dimension mismatch");
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Index a = 0; a < dim_a; ++a)
    for (Index ap = 0; ap < dim_a; ++ap) {
      const double w = op(a, ap);
      if (w != 0.0) out.middleRows(a * dim_b, dim_b).noalias() += w * x.middleRows(ap * dim_b, dim_b);
    }
  return out;
}

/// Computes (u_a ⊗ u_b)^T · x without forming the Kronecker product.
inline Matrix apply_kron_transpose(const Matrix& u_a, const Matrix& u_b, const Matrix& x) {
  const Index dim_a = u_a.rows();
  const Index dim_b = u_b.rows();
  if (u_a.cols() != dim_a || u_b.cols() != dim_b || dim_a * dim_b != x.rows())
    throw InvalidInput("apply_kron_transpose: dimension mismatch");
  Matrix tmp(x.rows(), x.cols());
  for (Index a = 0; a < dim_a; ++a)
    tmp.middleRows(a * dim_b, dim_b).noalias() = u_b.transpose() * x.middleRows(a * dim_b, dim_b);
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Index i = 0; i < dim_a; ++i)
    for (Index a = 0; a < dim_a; ++a) {
      const double w = u_a(a, i);
      if (w != 0.0) out.middleRows(i * dim_b, dim_b).noalias() += w * tmp.middleRows(a * dim_b, dim_b);
    }
  return out;
}

/// Indices that sort `v` ascending; stable so equal values keep their order.
inline std::vector<Index> argsort(const Vector& v) {
  std::vector<Index> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return v(a) < v(b); });
  return idx;
}

}  // namespace ethloc
