#pragma once

#include <boost/crc.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ethloc/error.hpp"
#include "ethloc/hamiltonians.hpp"
#include "ethloc/io/config.hpp"
#include "ethloc/linalg.hpp"

namespace ethloc::io {

static_assert(std::endian::native == std::endian::little, "cache files are written in host order; little-endian only");

// Layout: "ETHLOCSP" | u32 version | u32 key length | key bytes | u64 dim |
// dim eigenvalues | dim*dim eigenvector entries (column-major) | u32 CRC-32
// of everything before it. All numbers little-endian.
inline constexpr char cache_magic[8] = {'E', 'T', 'H', 'L', 'O', 'C', 'S', 'P'};
inline constexpr std::uint32_t cache_version = 1;

/// Exact byte image of the numeric parameters that determine a Hamiltonian.
class CacheKey {
public:
  explicit CacheKey(std::string tag) : tag_(std::move(tag)) { append_bytes(tag_.data(), tag_.size()); }

  template <class T>
  CacheKey& add(T v) {
    static_assert(std::is_arithmetic_v<T>);
    append_bytes(&v, sizeof v);
    return *this;
  }

  const std::string& bytes() const { return bytes_; }

  std::uint32_t checksum() const {
    boost::crc_32_type crc;
    crc.process_bytes(bytes_.data(), bytes_.size());
    return crc.checksum();
  }

  std::string file_name() const {
    std::ostringstream os;
    os << "spectrum-" << tag_ << "-" << std::hex << std::setw(8) << std::setfill('0') << checksum() << ".bin";
    return os.str();
  }

private:
  void append_bytes(const void* p, std::size_t n) { bytes_.append(static_cast<const char*>(p), n); }
  std::string tag_;
  std::string bytes_;
};

inline CacheKey chain_key(const SpinChainParams& p) {
  CacheKey k("chain");
  k.add(static_cast<std::int64_t>(p.L)).add(p.J).add(p.h_x).add(p.h_z);
  return k;
}

inline CacheKey random_key(const RandomSystemParams& p) {
  CacheKey k("random");
  k.add(static_cast<std::int64_t>(p.L_A)).add(static_cast<std::int64_t>(p.L_B)).add(static_cast<std::int64_t>(p.L_I));
  k.add(p.f).add(p.seed).add(p.a_scale);
  return k;
}

namespace detail {

template <class T>
void put(std::string& buf, T v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
bool get(const std::string& buf, std::size_t& pos, T& v) {
  if (pos + sizeof v > buf.size()) return false;
  std::memcpy(&v, buf.data() + pos, sizeof v);
  pos += sizeof v;
  return true;
}

inline std::uint32_t crc32(const char* p, std::size_t n) {
  boost::crc_32_type crc;
  crc.process_bytes(p, n);
  return crc.checksum();
}

}  // namespace detail

inline std::string serialize_spectrum(const Spectrum& s, const CacheKey& key) {
  std::string buf;
  const auto n = static_cast<std::uint64_t>(s.dim());
  buf.reserve(64 + key.bytes().size() + 8 * (n + n * n));
  buf.append(cache_magic, sizeof cache_magic);
  detail::put(buf, cache_version);
  detail::put(buf, static_cast<std::uint32_t>(key.bytes().size()));
  buf.append(key.bytes());
  detail::put(buf, n);
  buf.append(reinterpret_cast<const char*>(s.values.data()), 8 * n);
  buf.append(reinterpret_cast<const char*>(s.vectors.data()), 8 * n * n);
  detail::put(buf, detail::crc32(buf.data(), buf.size()));
  return buf;
}

/// Parses a cache image. Anything unexpected (truncation, wrong version,
/// different key, checksum mismatch) yields nullopt and `why` says which.
inline std::optional<Spectrum> deserialize_spectrum(const std::string& buf, const CacheKey& key,
                                                    std::string* why = nullptr) {
  auto fail = [&](const char* reason) -> std::optional<Spectrum> {
    if (why) *why = reason;
    return std::nullopt;
  };
  if (buf.size() < sizeof cache_magic + 4 || std::memcmp(buf.data(), cache_magic, sizeof cache_magic) != 0)
    return fail("bad magic");
  if (buf.size() < 4) return fail("truncated");
  std::uint32_t stored_crc = 0;
  std::memcpy(&stored_crc, buf.data() + buf.size() - 4, 4);
  if (detail::crc32(buf.data(), buf.size() - 4) != stored_crc) return fail("checksum mismatch");
  std::size_t pos = sizeof cache_magic;
  std::uint32_t version = 0, key_len = 0;
  if (!detail::get(buf, pos, version)) return fail("truncated");
  if (version != cache_version) return fail("version mismatch");
  if (!detail::get(buf, pos, key_len) || pos + key_len > buf.size()) return fail("truncated");
  if (buf.compare(pos, key_len, key.bytes()) != 0) return fail("key mismatch");
  pos += key_len;
  std::uint64_t n = 0;
  if (!detail::get(buf, pos, n)) return fail("truncated");
  if (n == 0 || pos + 8 * (n + n * n) + 4 != buf.size()) return fail("truncated");
  Spectrum s{Vector(static_cast<Index>(n)), Matrix(static_cast<Index>(n), static_cast<Index>(n))};
  std::memcpy(s.values.data(), buf.data() + pos, 8 * n);
  pos += 8 * n;
  std::memcpy(s.vectors.data(), buf.data() + pos, 8 * n * n);
  return s;
}

class SpectrumCache {
public:
  SpectrumCache(std::filesystem::path dir, CachePolicy policy) : dir_(std::move(dir)), policy_(policy) {}

  CachePolicy policy() const { return policy_; }
  std::filesystem::path path_for(const CacheKey& key) const { return dir_ / key.file_name(); }

  std::optional<Spectrum> load(const CacheKey& key) const {
    const auto path = path_for(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_spectrum(buf, key);
  }

  void store(const Spectrum& s, const CacheKey& key) const {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create cache directory '" + dir_.string() + "': " + ec.message());
    const auto path = path_for(key);
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write cache file '" + tmp.string() + "'");
      const std::string buf = serialize_spectrum(s, key);
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      if (!out) throw IoError("short write to cache file '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move cache file into place at '" + path.string() + "': " + ec.message());
  }

  CachePolicyError forbidden(const CacheKey& key) const {
    return CachePolicyError("no valid cached spectrum at '" + path_for(key).string() +
                            "' and the cache policy forbids computing one; rerun with --cache use (or recompute) "
                            "to diagonalize and populate the cache");
  }

  /// Applies the policy: reuse a valid entry, or compute and store.
  Spectrum get_or_compute(const CacheKey& key, const std::function<Spectrum()>& compute) const {
    if (policy_ != CachePolicy::recompute)
      if (auto s = load(key)) return std::move(*s);
    if (policy_ == CachePolicy::forbid) throw forbidden(key);
    Spectrum s = compute();
    store(s, key);
    return s;
  }

private:
  std::filesystem::path dir_;
  CachePolicy policy_;
};

}  // namespace ethloc::io
