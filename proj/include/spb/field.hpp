#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "spb/lattice.hpp"
#include "spb/types.hpp"

namespace spb {

// Divergence tolerance every solver step must respect.
inline constexpr double divergence_tolerance = 1e-12;

// Velocity coefficients u^(k) in C^3 on the dense dual lattice, normalized so
// that u(x) = V^{-1/2} sum_k u^(k) e^{ik.x}. Only retained modes may be
// nonzero; the Hermitian partner of every mode is stored explicitly.
class SpectralField {
public:
  explicit SpectralField(Lattice lattice, double t = 0.0)
      : lattice_(std::move(lattice)), coeffs_(lattice_.size(), CVec3{}),
        t_(t) {}

  const Lattice &lattice() const { return lattice_; }
  double time() const { return t_; }
  void set_time(double t) { t_ = t; }

  std::size_t size() const { return coeffs_.size(); }
  CVec3 &operator[](std::size_t idx) { return coeffs_[idx]; }
  const CVec3 &operator[](std::size_t idx) const { return coeffs_[idx]; }
  std::span<CVec3> data() { return coeffs_; }
  std::span<const CVec3> data() const { return coeffs_; }

  // Set u^(k) and its partner u^(-k) = conj(u^(k)) together.
  void set_pair(std::size_t idx, const CVec3 &value) {
    coeffs_[idx] = value;
    coeffs_[lattice_.negate(idx)] = conj(value);
  }

  SpectralField &operator+=(const SpectralField &o) {
    require_same(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  SpectralField &operator*=(double s) {
    for (auto &c : coeffs_) c *= cplx(s, 0.0);
    return *this;
  }

  void require_same(const SpectralField &o) const {
    if (!lattice_.same_shape(o.lattice_))
      throw ResolutionMismatch("spectral fields live on different lattices");
  }

private:
  Lattice lattice_;
  std::vector<CVec3> coeffs_;
  double t_;
};

// Pi_k(z) = z - (z.k) k / |k|^2, the projection onto the plane normal to k.
inline CVec3 leray_project(const Vec3 &k, const CVec3 &z) {
  const double kk = norm2(k);
  if (kk == 0.0)
    throw GaugeError("Leray projector undefined at k = 0; zero the mean mode");
  const cplx s = dot(k, z) / kk;
  return {z[0] - s * k[0], z[1] - s * k[1], z[2] - s * k[2]};
}

// Projects every retained k != 0, zeroes the mean mode and every
// non-retained mode.
inline SpectralField project_solenoidal(SpectralField f) {
  const auto &lat = f.lattice();
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    if (!lat.retained(idx) || idx == 0) {
      f[idx] = CVec3{};
      continue;
    }
    f[idx] = leray_project(lat.wavevector(idx), f[idx]);
  }
  return f;
}

// max over k of |k.u^(k)| / (|k||u^(k)|); 0 for the zero field.
inline double divergence_residual(const SpectralField &f) {
  const auto &lat = f.lattice();
  double worst = 0.0;
  for (std::size_t idx : lat.retained_indices()) {
    if (idx == 0) continue;
    const double a = norm(f[idx]);
    if (a == 0.0) continue;
    const Vec3 k = lat.wavevector(idx);
    worst = std::max(worst, std::abs(dot(k, f[idx])) / (norm(k) * a));
  }
  return worst;
}

// max over k of |u^(-k) - conj(u^(k))|, and mass outside the retained set.
inline double hermitian_residual(const SpectralField &f) {
  const auto &lat = f.lattice();
  double worst = 0.0;
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    if (!lat.retained(idx)) {
      worst = std::max(worst, norm(f[idx]));
      continue;
    }
    worst = std::max(worst, norm(f[lat.negate(idx)] - conj(f[idx])));
  }
  return worst;
}

// Discrete ||u^||^2 = sum_k |u^(k)|^2 |Gamma'|.
inline double spectral_norm2(const SpectralField &f) {
  AccurateSum s;
  for (std::size_t idx : f.lattice().retained_indices()) s.add(norm2(f[idx]));
  return s.value() * f.lattice().dual_cell_volume();
}

// ||u||_{L^2}^2 = V/(2pi)^3 ||u^||^2.
inline double plancherel_energy(const SpectralField &f) {
  const double V = f.lattice().volume();
  return V / (two_pi * two_pi * two_pi) * spectral_norm2(f);
}

// ||grad u||_{L^2}^2 = V/(2pi)^3 sum_k |k|^2 |u^(k)|^2 |Gamma'|.
inline double gradient_norm2(const SpectralField &f) {
  const auto &lat = f.lattice();
  AccurateSum s;
  for (std::size_t idx : lat.retained_indices())
    s.add(norm2(lat.wavevector(idx)) * norm2(f[idx]));
  const double V = lat.volume();
  return V / (two_pi * two_pi * two_pi) * s.value() * lat.dual_cell_volume();
}

// int grad u : grad v dx = V/(2pi)^3 sum_k |k|^2 Re(conj(u^) . v^) |Gamma'|.
inline double gradient_inner(const SpectralField &u, const SpectralField &v) {
  u.require_same(v);
  const auto &lat = u.lattice();
  AccurateSum s;
  for (std::size_t idx : lat.retained_indices())
    s.add(norm2(lat.wavevector(idx)) * std::real(cdot(u[idx], v[idx])));
  const double V = lat.volume();
  return V / (two_pi * two_pi * two_pi) * s.value() * lat.dual_cell_volume();
}

// Spatial inner product int u . f dx = sum_k u^(k) . conj(f^(k)).
inline double l2_inner(const SpectralField &u, const SpectralField &f) {
  u.require_same(f);
  AccurateSum s;
  for (std::size_t idx : u.lattice().retained_indices())
    s.add(std::real(cdot(f[idx], u[idx])));
  const auto &lat = u.lattice();
  return lat.volume() / (two_pi * two_pi * two_pi) * s.value() *
         lat.dual_cell_volume();
}

// m = sup_{k != 0} |k| |u^(k)|, the quantity bounded by R1 on A_{R1}.
inline double max_scaled_amplitude(const SpectralField &f) {
  const auto &lat = f.lattice();
  double m = 0.0;
  for (std::size_t idx : lat.retained_indices()) {
    if (idx == 0) continue;
    m = std::max(m, norm(lat.wavevector(idx)) * norm(f[idx]));
  }
  return m;
}

// ------------------------------------------------------------------------
// Field builders.

inline CVec3 random_complex_vector(std::mt19937_64 &rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVec3 z;
  for (auto &c : z) {
    const double re = g(rng);
    const double im = g(rng);
    c = cplx(re, im) / std::sqrt(2.0);
  }
  return z;
}

// Random solenoidal field supported on k_lo <= |k| <= k_hi with amplitude
// profile |u^(k)| ~ |k|^{-slope}, rescaled so that ||u||_{L^2} = l2_norm.
inline SpectralField random_solenoidal(const Lattice &lat, std::uint64_t seed,
                                       double k_lo, double k_hi, double slope,
                                       double l2_norm) {
  SpectralField f(lat);
  std::mt19937_64 rng(seed);
  for (std::size_t idx : lat.retained_indices()) {
    if (!lat.canonical(idx)) continue;
    const Vec3 k = lat.wavevector(idx);
    const double kn = norm(k);
    if (kn < k_lo || kn > k_hi) continue;
    CVec3 z = leray_project(k, random_complex_vector(rng));
    z *= cplx(std::pow(kn, -slope), 0.0);
    f.set_pair(idx, z);
  }
  const double e = plancherel_energy(f);
  if (e > 0.0) f *= l2_norm / std::sqrt(e);
  return f;
}

// Unit helical vector h with i k x h = sign |k| h (a curl eigenvector).
inline CVec3 helical_basis(const Vec3 &k, int sign) {
  const double kn = norm(k);
  const Vec3 kh{k[0] / kn, k[1] / kn, k[2] / kn};
  // Any fixed axis not parallel to k gives a deterministic e1.
  Vec3 a = std::abs(kh[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  const double ad = dot(a, kh);
  Vec3 e1{a[0] - ad * kh[0], a[1] - ad * kh[1], a[2] - ad * kh[2]};
  const double n1 = norm(e1);
  for (auto &c : e1) c /= n1;
  const Vec3 e2{kh[1] * e1[2] - kh[2] * e1[1], kh[2] * e1[0] - kh[0] * e1[2],
                kh[0] * e1[1] - kh[1] * e1[0]};
  const double s = sign >= 0 ? 1.0 : -1.0;
  const double r = 1.0 / std::sqrt(2.0);
  return {cplx(e1[0] * r, s * e2[0] * r), cplx(e1[1] * r, s * e2[1] * r),
          cplx(e1[2] * r, s * e2[2] * r)};
}

// Beltrami field on the shell |k| = shell_radius (within rel_tol): every mode
// is a curl eigenvector with eigenvalue sign*|k|, random complex amplitudes,
// rescaled to ||u||_{L^2} = l2_norm.
inline SpectralField beltrami_shell(const Lattice &lat, double shell_radius,
                                    int sign, std::uint64_t seed,
                                    double l2_norm) {
  SpectralField f(lat);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t idx : lat.retained_indices()) {
    if (!lat.canonical(idx)) continue;
    const Vec3 k = lat.wavevector(idx);
    if (std::abs(norm(k) - shell_radius) > 1e-12 * shell_radius) continue;
    const double re = g(rng);
    const double im = g(rng);
    f.set_pair(idx, cplx(re, im) * helical_basis(k, sign));
  }
  const double e = plancherel_energy(f);
  if (e > 0.0) f *= l2_norm / std::sqrt(e);
  return f;
}

// Arnold-Beltrami-Childress flow
//   u = (A sin x3 + C cos x2, B sin x1 + A cos x3, C sin x2 + B cos x1)
// in terms of the fundamental mode of each axis (x_i scaled by 2pi/L_i).
// On the 2pi-cube it satisfies curl u = u.
inline SpectralField abc_flow(const Lattice &lat, double A, double B,
                              double C) {
  SpectralField f(lat);
  const double sv = std::sqrt(lat.volume());
  const cplx half(0.5, 0.0);
  const cplx over_2i(0.0, -0.5); // 1/(2i)
  // u^(k) = sqrt(V) * (coefficient of e^{ik.x}).
  f.set_pair(lat.index_of({0, 0, 1}),
             CVec3{sv * A * over_2i, sv * A * half, cplx{}});
  f.set_pair(lat.index_of({0, 1, 0}),
             CVec3{sv * C * half, cplx{}, sv * C * over_2i});
  f.set_pair(lat.index_of({1, 0, 0}),
             CVec3{cplx{}, sv * B * over_2i, sv * B * half});
  return f;
}

} // namespace spb
