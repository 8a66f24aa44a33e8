#pragma once

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <cstdint>
#include <random>

#include "ethloc/linalg.hpp"

namespace ethloc {

// All randomness goes through one engine type. std::mt19937_64 and
// std::seed_seq are fully specified by the standard, and the Boost
// distributions are implementation-fixed, so draws are reproducible across
// toolchains.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Independent stream for (seed, index), e.g. one per ensemble member.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t index, std::uint32_t tag = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), tag};
  return Rng(seq);
}

inline double draw_normal(Rng& rng, double mean = 0.0, double sd = 1.0) {
  boost::random::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

inline double draw_uniform(Rng& rng, double lo, double hi) {
  boost::random::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng);
}

/// Standard-normal matrix, filled row by row.
inline Matrix normal_matrix(Index rows, Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) g(i, j) = draw_normal(rng);
  return g;
}

/// GOE sample (G + G^T)/2: diagonal variance 1, off-diagonal variance 1/2.
inline Matrix sample_goe(Index dim, Rng& rng) {
  if (dim < 1) throw InvalidInput("sample_goe: dim must be positive");
  const Matrix g = normal_matrix(dim, dim, rng);
  return 0.5 * (g + g.transpose());
}

/// Haar-random orthogonal matrix: QR of a standard-normal matrix with the
/// signs of diag(R) folded into Q.
inline Matrix haar_orthogonal(Index dim, Rng& rng) {
  if (dim < 1) throw InvalidInput("haar_orthogonal: dim must be positive");
  const Matrix g = normal_matrix(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Index k = 0; k < dim; ++k)
    if (r(k, k) < 0.0) q.col(k) *= -1.0;
  return q;
}

}  // namespace ethloc
