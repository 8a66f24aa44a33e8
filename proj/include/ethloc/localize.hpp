#pragma once

#include <numeric>
#include <sstream>
#include <vector>

#include "ethloc/error.hpp"
#include "ethloc/linalg.hpp"

namespace ethloc {

struct EigenvalueClass {
  double value = 0.0;  // mean of the clustered eigenvalues
  Index multiplicity = 0;
  double spread = 0.0;  // max - min inside the cluster
};

/// D_O = |H| / gcd of eigenvalue multiplicities: the smallest tensor factor
/// on which the operator can act as O_A ⊗ I.
struct LocalizabilityReport {
  Index total_dim = 0;
  std::vector<EigenvalueClass> classes;
  Index gcd_multiplicity = 0;
  Index localizable_dim = 0;
};

/// Groups sorted eigenvalues; a new class starts wherever the gap to the
/// previous value exceeds tol * (spectral range).
inline std::vector<EigenvalueClass> cluster_eigenvalues(const Vector& eigenvalues, double tol) {
  if (eigenvalues.size() == 0) throw InvalidInput("localizability: empty spectrum");
  if (!(tol >= 0.0)) throw InvalidInput("localizability: tol must be >= 0");
  std::vector<double> v(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  std::sort(v.begin(), v.end());
  const double thresh = tol * (v.back() - v.front());
  std::vector<EigenvalueClass> out;
  std::size_t start = 0;
  auto close = [&](std::size_t end) {
    double sum = 0.0;
    for (std::size_t k = start; k < end; ++k) sum += v[k];
    const auto m = static_cast<Index>(end - start);
    out.push_back({sum / static_cast<double>(m), m, v[end - 1] - v[start]});
  };
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] - v[k - 1] > thresh) {
      close(k);
      start = k;
    }
  close(v.size());
  return out;
}

inline LocalizabilityReport localizability(const Vector& eigenvalues, double tol = 1e-9) {
  LocalizabilityReport r;
  r.total_dim = eigenvalues.size();
  r.classes = cluster_eigenvalues(eigenvalues, tol);
  Index g = 0;
  for (const auto& c : r.classes) g = std::gcd(g, c.multiplicity);
  r.gcd_multiplicity = g;
  r.localizable_dim = r.total_dim / g;
  return r;
}

struct LocalizingBasis {
  Matrix basis;        // orthogonal, columns grouped so basis^T O basis = kron(local_block, I)
  Matrix local_block;  // D_O x D_O, diagonal with ascending values
  LocalizabilityReport report;
};

/// Sorting the eigenvectors by eigenvalue already yields a localizing basis:
/// every class occupies a contiguous run whose length is a multiple of the
/// gcd, so consecutive groups of gcd columns form the I factor.
inline LocalizingBasis localizing_basis(const Matrix& op, double tol = 1e-9) {
  const Spectrum s = eig_sym(op);
  LocalizingBasis out;
  out.report = localizability(s.values, tol);
  const auto& rep = out.report;
  const double range = s.range();
  for (const auto& c : rep.classes) {
    if (c.multiplicity > 1 && c.spread > tol * range * 1.000001 && c.spread > 1e-12 * std::max(1.0, range)) {
      std::ostringstream os;
      os << "cannot tile a localizing basis: eigenvalue class near " << c.value << " (multiplicity "
         << c.multiplicity << ") spans " << c.spread << ", wider than the clustering tolerance "
         << tol * range << "; the spectrum is only approximately degenerate";
      throw ComputeError(os.str());
    }
  }
  const Index g = rep.gcd_multiplicity;
  const Index d = rep.localizable_dim;
  out.basis = s.vectors;
  out.local_block = Matrix::Zero(d, d);
  Index slot = 0;
  for (const auto& c : rep.classes)
    for (Index k = 0; k < c.multiplicity / g; ++k) out.local_block(slot, slot) = c.value, ++slot;
  return out;
}

}  // namespace ethloc
