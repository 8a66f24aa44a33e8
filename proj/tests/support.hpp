#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <map>

#include "ethloc/ethloc.hpp"
#include "ethloc/figures.hpp"
#include "ethloc/io/cache.hpp"

namespace ethloc::test {

inline std::filesystem::path cache_dir() { return ETHLOC_TEST_CACHE_DIR; }

/// L-site chain with the default couplings; the total spectrum goes through
/// the shared on-disk cache so that repeated test binaries do not redo it.
inline const Spectrum& chain_spectrum(int L) {
  static std::map<int, Spectrum> memo;
  auto it = memo.find(L);
  if (it != memo.end()) return it->second;
  SpinChainParams p;
  p.L = L;
  const io::SpectrumCache cache(cache_dir(), io::CachePolicy::use);
  Spectrum s = cache.get_or_compute(io::chain_key(p), [&] { return eig_sym(build_spin_chain(p)); });
  return memo.emplace(L, std::move(s)).first->second;
}

inline BipartiteSystem random_system(const RandomSystemParams& p) {
  return cached_random_system(p, io::SpectrumCache(cache_dir(), io::CachePolicy::use));
}

inline BipartiteSystem chain_system(int L, int cut) {
  SpinChainParams p;
  p.L = L;
  return decompose_chain(p, cut, chain_spectrum(L));
}

inline Matrix random_symmetric(Index dim, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return sample_goe(dim, rng);
}

/// Diagonal-factor system with a small random coupling, built in memory.
inline BipartiteSystem toy_system(const Vector& e_a, const Vector& e_b, double coupling, std::uint64_t seed) {
  const Index n = e_a.size() * e_b.size();
  Matrix h_i = Matrix::Zero(n, n);
  if (coupling != 0.0) h_i = coupling * random_symmetric(n, seed);
  return assemble_system(Matrix(e_a.asDiagonal()), Matrix(e_b.asDiagonal()), h_i);
}

}  // namespace ethloc::test
