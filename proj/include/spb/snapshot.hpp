#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "spb/field.hpp"

namespace spb {

// Binary checkpoint:
//   "SPB1" | u32 N1 N2 N3 | f64 L1 L2 L3 | f64 nu | f64 t |
//   N1*N2*N3 modes x 3 components x (f64 re, f64 im)
// all little-endian, modes in lattice flat order (k3 fastest).
struct Snapshot {
  SpectralField field;
  double nu = 0.0;
};

namespace detail {

template <typename T> void put_le(std::ostream &os, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = std::bit_cast<U>(value);
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
  os.write(reinterpret_cast<const char *>(buf), sizeof(T));
}

template <typename T> T get_le(std::istream &is, const std::string &what) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char *>(buf), sizeof(T)))
    throw CorruptInput("snapshot truncated while reading " + what);
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bits |= static_cast<U>(buf[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

} // namespace detail

inline void write_snapshot(std::ostream &os, const SpectralField &f,
                           double nu) {
  os.write("SPB1", 4);
  const auto &lat = f.lattice();
  for (int n : lat.modes()) detail::put_le<std::uint32_t>(os, n);
  for (double l : lat.lengths()) detail::put_le<double>(os, l);
  detail::put_le<double>(os, nu);
  detail::put_le<double>(os, f.time());
  for (const CVec3 &z : f.data())
    for (const cplx &c : z) {
      detail::put_le<double>(os, c.real());
      detail::put_le<double>(os, c.imag());
    }
  if (!os) throw Error("failed writing snapshot");
}

inline Snapshot read_snapshot(std::istream &is,
                              DealiasRule rule = DealiasRule::TwoThirdsSphere) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "SPB1", 4) != 0)
    throw CorruptInput("snapshot magic mismatch (expected SPB1)");
  std::array<int, 3> n{};
  for (auto &v : n) {
    const auto u = detail::get_le<std::uint32_t>(is, "resolution");
    if (u > 4096) throw CorruptInput("snapshot resolution out of range");
    v = static_cast<int>(u);
  }
  std::array<double, 3> L{};
  for (auto &v : L) v = detail::get_le<double>(is, "periods");
  const double nu = detail::get_le<double>(is, "viscosity");
  const double t = detail::get_le<double>(is, "time");
  Lattice lat(L, n, rule);
  SpectralField f(lat, t);
  for (CVec3 &z : f.data())
    for (cplx &c : z) {
      const double re = detail::get_le<double>(is, "coefficients");
      const double im = detail::get_le<double>(is, "coefficients");
      c = cplx(re, im);
    }
  return Snapshot{std::move(f), nu};
}

// Writes through a temporary sibling and renames, so readers never see a
// partially written checkpoint.
inline void write_snapshot_file(const std::filesystem::path &path,
                                const SpectralField &f, double nu) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp + " for writing");
    write_snapshot(os, f, nu);
  }
  std::filesystem::rename(tmp, path);
}

inline Snapshot read_snapshot_file(const std::filesystem::path &path,
                                   DealiasRule rule = DealiasRule::TwoThirdsSphere) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CorruptInput("missing snapshot " + path.string());
  try {
    return read_snapshot(is, rule);
  } catch (const CorruptInput &e) {
    throw CorruptInput(path.string() + ": " + e.what());
  }
}

} // namespace spb
