#pragma once

#include <cstdint>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "elastofm/farfield.hpp"
#include "elastofm/grid.hpp"

namespace elastofm {

// FFM1 far-field archive, little-endian:
//   "FFM1" | u32 version | u32 n_theta | u32 n_phi | f64 omega
//   | u32 media_count | media_count x (f64 lambda, f64 mu, f64 rho)
//   | 8-byte space-padded ASCII role tag
//   | (3N)^2 x (f64 re, f64 im) row-major
//   | u64 FNV-1a checksum of all preceding bytes
inline constexpr std::uint32_t kFfm1Version = 1;

class ArchiveError : public std::runtime_error {
 public:
  explicit ArchiveError(const std::string& m) : std::runtime_error(m) {}
};

namespace detail {

inline std::uint64_t fnv1a(const unsigned char* data, std::size_t n,
                           std::uint64_t h = 1469598103934665603ULL) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 1099511628211ULL;
  }
  return h;
}

struct ByteSink {
  std::vector<unsigned char> bytes;
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    bytes.insert(bytes.end(), b, b + n);
  }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
};

struct ByteSource {
  const unsigned char* p;
  std::size_t n;
  std::size_t pos = 0;
  void raw(void* out, std::size_t k) {
    if (pos + k > n) throw ArchiveError("FFM1 archive truncated");
    std::memcpy(out, p + pos, k);
    pos += k;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, 8);
    return v;
  }
  double f64() {
    double v;
    raw(&v, 8);
    return v;
  }
};

}  // namespace detail

inline std::vector<unsigned char> encode_archive(const FarFieldMatrix& m) {
  static_assert(std::endian::native == std::endian::little,
                "FFM1 writer assumes a little-endian host");
  detail::ByteSink s;
  s.raw("FFM1", 4);
  s.u32(kFfm1Version);
  s.u32(static_cast<std::uint32_t>(m.grid.n_theta));
  s.u32(static_cast<std::uint32_t>(m.grid.n_phi));
  s.f64(m.omega);
  s.u32(static_cast<std::uint32_t>(m.media.size()));
  for (const auto& med : m.media) {
    s.f64(med.lambda);
    s.f64(med.mu);
    s.f64(med.rho);
  }
  std::string tag = role_name(m.role);
  tag.resize(8, ' ');
  s.raw(tag.data(), 8);
  const int dim = m.dim();
  require(m.a.rows() == dim && m.a.cols() == dim, "archive: matrix dimension mismatch");
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      s.f64(m.a(i, j).real());
      s.f64(m.a(i, j).imag());
    }
  }
  s.u64(detail::fnv1a(s.bytes.data(), s.bytes.size()));
  return s.bytes;
}

inline FarFieldMatrix decode_archive(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 12) throw ArchiveError("FFM1 archive too short");
  const std::uint64_t want = detail::fnv1a(bytes.data(), bytes.size() - 8);
  std::uint64_t got;
  std::memcpy(&got, bytes.data() + bytes.size() - 8, 8);
  if (want != got) throw ArchiveError("FFM1 checksum mismatch");
  detail::ByteSource src{bytes.data(), bytes.size() - 8};
  char magic[4];
  src.raw(magic, 4);
  if (std::memcmp(magic, "FFM1", 4) != 0) throw ArchiveError("not an FFM1 archive");
  const std::uint32_t version = src.u32();
  if (version != kFfm1Version) throw ArchiveError("unsupported FFM1 version");
  FarFieldMatrix m;
  const int n_theta = static_cast<int>(src.u32());
  const int n_phi = static_cast<int>(src.u32());
  m.omega = src.f64();
  m.grid = direction_grid(n_theta, n_phi);
  const std::uint32_t nmedia = src.u32();
  for (std::uint32_t i = 0; i < nmedia; ++i) {
    ElasticMedium med;
    med.lambda = src.f64();
    med.mu = src.f64();
    med.rho = src.f64();
    m.media.push_back(med);
  }
  char tag[9] = {};
  src.raw(tag, 8);
  std::string tagstr(tag, 8);
  while (!tagstr.empty() && tagstr.back() == ' ') tagstr.pop_back();
  m.role = role_from_name(tagstr);
  const int dim = m.dim();
  const std::size_t need = static_cast<std::size_t>(dim) * dim * 16;
  if (src.n - src.pos != need) throw ArchiveError("FFM1 payload size inconsistent with header");
  m.a.resize(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const double re = src.f64(), im = src.f64();
      m.a(i, j) = cplx(re, im);
    }
  }
  return m;
}

inline void write_archive(const std::string& path, const FarFieldMatrix& m) {
  const auto bytes = encode_archive(m);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ArchiveError("cannot open archive for writing: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ArchiveError("archive write failed: " + path);
}

inline FarFieldMatrix read_archive(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ArchiveError("cannot open archive: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  return decode_archive(bytes);
}

}  // namespace elastofm
