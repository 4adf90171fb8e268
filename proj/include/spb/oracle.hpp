#pragma once

#include <cmath>

#include "spb/field.hpp"

namespace spb {

// Direct Galerkin double sum
//   N(k) = -i Pi_k k . (1/sqrt V) sum_{k1} u^(k - k1) (x) u^(k1)
// over retained k, k1, k - k1. O(M^2) in the retained mode count M.
inline SpectralField brute_force_nonlinear(const SpectralField &u) {
  const auto &lat = u.lattice();
  const auto &ret = lat.retained_indices();
  const double inv_sqrt_v = 1.0 / std::sqrt(lat.volume());
  SpectralField out(lat, u.time());
  const cplx minus_i(0.0, -1.0);
  for (std::size_t idx : ret) {
    if (idx == 0 || !lat.canonical(idx)) continue;
    const auto n = lat.mode_numbers(idx);
    const Vec3 k = lat.wavevector(idx);
    CVec3 acc{};
    for (std::size_t j1 : ret) {
      const auto m = lat.mode_numbers(j1);
      const std::array<int, 3> d{n[0] - m[0], n[1] - m[1], n[2] - m[2]};
      if (!lat.in_box(d)) continue;
      const std::size_t jd = lat.index_of(d);
      if (!lat.retained(jd)) continue;
      // k . (a (x) b) = (k.a) b
      acc += dot(k, u[jd]) * u[j1];
    }
    acc *= cplx(inv_sqrt_v, 0.0);
    out.set_pair(idx, minus_i * leray_project(k, acc));
  }
  return out;
}

// max_k |a(k) - b(k)| / max_k |b(k)| (absolute when b vanishes).
inline double relative_max_difference(const SpectralField &a,
                                      const SpectralField &b) {
  a.require_same(b);
  double diff = 0.0, scale = 0.0;
  for (std::size_t idx = 0; idx < a.size(); ++idx) {
    diff = std::max(diff, norm(a[idx] - b[idx]));
    scale = std::max(scale, norm(b[idx]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

} // namespace spb
