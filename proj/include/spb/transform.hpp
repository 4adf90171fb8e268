#pragma once

#include <fftw3.h>

#include <array>
#include <memory>
#include <vector>

#include "spb/field.hpp"

namespace spb {

// Real samples of a vector field on the uniform grid x_j = j L / N, laid out
// row-major (x3 fastest) like the spectral array.
struct PhysicalField {
  Lattice lattice;
  std::array<std::vector<double>, 3> comp;

  explicit PhysicalField(const Lattice &lat)
      : lattice(lat), comp{std::vector<double>(lat.size()),
                           std::vector<double>(lat.size()),
                           std::vector<double>(lat.size())} {}
};

namespace detail {

struct FftwFree {
  void operator()(void *p) const { fftw_free(p); }
};
struct PlanDestroy {
  void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
};
using PlanPtr = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy>;

} // namespace detail

// Owns FFTW buffers and plans for one lattice. Plans use FFTW_ESTIMATE on
// buffers allocated once, so the same input always produces bit-identical
// output. Not safe for concurrent use; give each thread its own instance.
class Transform {
public:
  explicit Transform(const Lattice &lat) : lat_(lat) {
    const auto &n = lat_.modes();
    half3_ = n[2] / 2 + 1;
    nreal_ = lat_.size();
    nhalf_ = static_cast<std::size_t>(n[0]) * n[1] * half3_;
    real_.reset(static_cast<double *>(fftw_malloc(sizeof(double) * nreal_)));
    spec_.reset(static_cast<fftw_complex *>(
        fftw_malloc(sizeof(fftw_complex) * nhalf_)));
    forward_.reset(fftw_plan_dft_r2c_3d(n[0], n[1], n[2], real_.get(),
                                        spec_.get(), FFTW_ESTIMATE));
    backward_.reset(fftw_plan_dft_c2r_3d(n[0], n[1], n[2], spec_.get(),
                                         real_.get(), FFTW_ESTIMATE));
  }

  Transform(const Transform &) = delete;
  Transform &operator=(const Transform &) = delete;

  const Lattice &lattice() const { return lat_; }

  // u(x_j) = V^{-1/2} sum_k u^(k) e^{ik.x_j}.
  PhysicalField to_physical(const SpectralField &f) {
    check(f.lattice());
    PhysicalField out(lat_);
    std::vector<cplx> scalar(lat_.size());
    for (int c = 0; c < 3; ++c) {
      for (std::size_t idx = 0; idx < f.size(); ++idx) scalar[idx] = f[idx][c];
      scalar_to_physical(scalar, out.comp[c]);
    }
    return out;
  }

  // u^(k) = V^{1/2}/N_tot sum_j u(x_j) e^{-ik.x_j}, kept on the retained set
  // with exact Hermitian symmetry.
  SpectralField to_spectral(const PhysicalField &p, double t = 0.0) {
    check(p.lattice);
    SpectralField out(lat_, t);
    std::vector<cplx> scalar;
    for (int c = 0; c < 3; ++c) {
      scalar_to_spectral(p.comp[c], scalar);
      for (std::size_t idx = 0; idx < out.size(); ++idx)
        out[idx][c] = scalar[idx];
    }
    return out;
  }

  // Scalar variants on dense spectral arrays (same layout as SpectralField).
  void scalar_to_physical(const std::vector<cplx> &spec,
                          std::vector<double> &phys) {
    const auto &n = lat_.modes();
    const double scale = 1.0 / std::sqrt(lat_.volume());
    for (int i1 = 0; i1 < n[0]; ++i1)
      for (int i2 = 0; i2 < n[1]; ++i2)
        for (int i3 = 0; i3 < half3_; ++i3) {
          const std::size_t h = half_index(i1, i2, i3);
          // The Nyquist column i3 = N3/2 is never retained.
          const cplx w =
              i3 < n[2] / 2 ? spec[lat_.flat(i1, i2, i3)] * scale : cplx{};
          spec_.get()[h][0] = w.real();
          spec_.get()[h][1] = w.imag();
        }
    fftw_execute(backward_.get());
    phys.assign(real_.get(), real_.get() + nreal_);
  }

  void scalar_to_spectral(const std::vector<double> &phys,
                          std::vector<cplx> &spec) {
    std::copy(phys.begin(), phys.end(), real_.get());
    fftw_execute(forward_.get());
    const double scale = std::sqrt(lat_.volume()) / static_cast<double>(nreal_);
    spec.assign(lat_.size(), cplx{});
    for (std::size_t idx : lat_.retained_indices()) {
      if (idx == 0) {
        spec[0] = cplx(spec_.get()[0][0] * scale, 0.0);
        continue;
      }
      if (!lat_.canonical(idx)) continue;
      const cplx v = half_value(idx) * scale;
      spec[idx] = v;
      spec[lat_.negate(idx)] = std::conj(v);
    }
  }

  // Half-spectrum coefficient (unscaled r2c output) of a retained mode with
  // n3 >= 0, or its conjugate partner otherwise. Valid after a forward run.
  cplx half_value(std::size_t idx) const {
    const auto &n = lat_.modes();
    auto m = lat_.mode_numbers(idx);
    bool flip = false;
    if (m[2] < 0) {
      m = {-m[0], -m[1], -m[2]};
      flip = true;
    }
    const int i1 = m[0] >= 0 ? m[0] : m[0] + n[0];
    const int i2 = m[1] >= 0 ? m[1] : m[1] + n[1];
    const auto &c = spec_.get()[half_index(i1, i2, m[2])];
    const cplx v(c[0], c[1]);
    return flip ? std::conj(v) : v;
  }

  // Forward transform of a real array; the result stays in the internal
  // half-spectrum buffer and is read with half_value().
  void forward_in_place(const std::vector<double> &phys) {
    std::copy(phys.begin(), phys.end(), real_.get());
    fftw_execute(forward_.get());
  }

  double forward_scale() const {
    return std::sqrt(lat_.volume()) / static_cast<double>(nreal_);
  }

private:
  void check(const Lattice &other) const {
    if (!lat_.same_shape(other))
      throw ResolutionMismatch("transform lattice does not match field lattice");
  }
  std::size_t half_index(int i1, int i2, int i3) const {
    return (static_cast<std::size_t>(i1) * lat_.modes()[1] + i2) * half3_ + i3;
  }

  Lattice lat_;
  int half3_ = 0;
  std::size_t nreal_ = 0;
  std::size_t nhalf_ = 0;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
  detail::PlanPtr forward_;
  detail::PlanPtr backward_;
};

// Trapezoidal (periodic) quadrature of int |u|^2 dx from grid samples.
inline double physical_energy(const PhysicalField &p) {
  AccurateSum s;
  for (int c = 0; c < 3; ++c)
    for (double v : p.comp[c]) s.add(v * v);
  return s.value() * p.lattice.volume() / static_cast<double>(p.lattice.size());
}

} // namespace spb
