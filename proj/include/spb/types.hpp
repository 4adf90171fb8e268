#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

namespace spb {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using CVec3 = std::array<cplx, 3>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double four_pi = 4.0 * std::numbers::pi;

// Error hierarchy. Every failure the library reports derives from spb::Error
// so the CLI can map them to one exit path.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GaugeError : Error {
  using Error::Error;
};
struct ResolutionMismatch : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct CorruptInput : Error {
  using Error::Error;
};

inline double dot(const Vec3 &a, const Vec3 &b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm2(const Vec3 &a) { return dot(a, a); }
inline double norm(const Vec3 &a) { return std::sqrt(norm2(a)); }

// Bilinear (non-conjugating) product k . z for real k.
inline cplx dot(const Vec3 &k, const CVec3 &z) {
  return k[0] * z[0] + k[1] * z[1] + k[2] * z[2];
}
inline double norm2(const CVec3 &z) {
  return std::norm(z[0]) + std::norm(z[1]) + std::norm(z[2]);
}
inline double norm(const CVec3 &z) { return std::sqrt(norm2(z)); }

// Hermitian inner product conj(a) . b
inline cplx cdot(const CVec3 &a, const CVec3 &b) {
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1] +
         std::conj(a[2]) * b[2];
}

inline CVec3 conj(const CVec3 &z) {
  return {std::conj(z[0]), std::conj(z[1]), std::conj(z[2])};
}

inline CVec3 &operator+=(CVec3 &a, const CVec3 &b) {
  for (int i = 0; i < 3; ++i) a[i] += b[i];
  return a;
}
inline CVec3 &operator-=(CVec3 &a, const CVec3 &b) {
  for (int i = 0; i < 3; ++i) a[i] -= b[i];
  return a;
}
inline CVec3 &operator*=(CVec3 &a, cplx s) {
  for (auto &c : a) c *= s;
  return a;
}
inline CVec3 operator+(CVec3 a, const CVec3 &b) { return a += b; }
inline CVec3 operator-(CVec3 a, const CVec3 &b) { return a -= b; }
inline CVec3 operator*(cplx s, CVec3 a) { return a *= s; }
inline CVec3 operator*(double s, CVec3 a) { return a *= cplx(s, 0.0); }

// Neumaier-compensated summation. Used wherever a total has to agree with a
// differently-ordered partition of the same terms to a few ulp.
class AccurateSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double accurate_sum(std::span<const double> xs) {
  AccurateSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

} // namespace spb
