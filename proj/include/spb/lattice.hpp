#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "spb/types.hpp"

namespace spb {

enum class DealiasRule {
  // Spherical truncation |k| < min_i (2pi/L_i)(N_i/3). Quadratic products of
  // retained modes never alias back onto the retained set.
  TwoThirdsSphere,
  // Every mode except the Nyquist planes (kept out so k -> -k stays closed).
  None,
};

inline std::string to_string(DealiasRule r) {
  return r == DealiasRule::TwoThirdsSphere ? "two_thirds_sphere" : "none";
}

inline DealiasRule dealias_rule_from_string(const std::string &s) {
  if (s == "two_thirds_sphere") return DealiasRule::TwoThirdsSphere;
  if (s == "none") return DealiasRule::None;
  throw ConfigError("unknown dealias rule '" + s + "'");
}

// Rectangular periodic box R^3 / (L1 Z x L2 Z x L3 Z) sampled with N1 x N2 x N3
// points. Dual-lattice modes are addressed by a flat index into a dense
// N1*N2*N3 array in DFT order (0, 1, ..., N/2-1, -N/2, ..., -1), k3 fastest.
class Lattice {
public:
  Lattice(std::array<double, 3> lengths, std::array<int, 3> modes,
          DealiasRule rule = DealiasRule::TwoThirdsSphere)
      : L_(lengths), N_(modes), rule_(rule) {
    for (int i = 0; i < 3; ++i) {
      if (!(L_[i] > 0.0) || !std::isfinite(L_[i]))
        throw ConfigError("lattice period must be positive and finite");
      if (N_[i] < 4 || N_[i] % 2 != 0)
        throw ConfigError("lattice resolution must be even and >= 4, got " +
                          std::to_string(N_[i]));
      dk_[i] = two_pi / L_[i];
    }
    build_tables();
  }

  // Cube of side 2pi with N^3 points; V = (2pi)^3 and |Gamma'| = 1.
  static Lattice cube(int n, DealiasRule rule = DealiasRule::TwoThirdsSphere) {
    return Lattice({two_pi, two_pi, two_pi}, {n, n, n}, rule);
  }

  const std::array<double, 3> &lengths() const { return L_; }
  const std::array<int, 3> &modes() const { return N_; }
  DealiasRule dealias_rule() const { return rule_; }

  double volume() const { return L_[0] * L_[1] * L_[2]; }
  // |Gamma'| = (2pi)^3 / V, evaluated as the product of dual spacings.
  double dual_cell_volume() const { return dk_[0] * dk_[1] * dk_[2]; }
  const std::array<double, 3> &dual_spacing() const { return dk_; }
  double min_dual_spacing() const {
    return std::min({dk_[0], dk_[1], dk_[2]});
  }
  double min_grid_spacing() const {
    return std::min({L_[0] / N_[0], L_[1] / N_[1], L_[2] / N_[2]});
  }

  std::size_t size() const {
    return static_cast<std::size_t>(N_[0]) * N_[1] * N_[2];
  }

  std::size_t flat(int i1, int i2, int i3) const {
    return (static_cast<std::size_t>(i1) * N_[1] + i2) * N_[2] + i3;
  }

  // Signed integer mode numbers of a flat index.
  std::array<int, 3> mode_numbers(std::size_t idx) const {
    const int i3 = static_cast<int>(idx % N_[2]);
    const int i2 = static_cast<int>((idx / N_[2]) % N_[1]);
    const int i1 = static_cast<int>(idx / (static_cast<std::size_t>(N_[2]) * N_[1]));
    return {signed_mode(i1, N_[0]), signed_mode(i2, N_[1]),
            signed_mode(i3, N_[2])};
  }

  // Flat index of signed mode numbers; modes must lie in [-N/2, N/2).
  std::size_t index_of(const std::array<int, 3> &n) const {
    return flat(wrap(n[0], N_[0]), wrap(n[1], N_[1]), wrap(n[2], N_[2]));
  }

  bool in_box(const std::array<int, 3> &n) const {
    for (int i = 0; i < 3; ++i)
      if (n[i] < -N_[i] / 2 || n[i] >= N_[i] / 2) return false;
    return true;
  }

  Vec3 wavevector(std::size_t idx) const {
    const auto n = mode_numbers(idx);
    return {dk_[0] * n[0], dk_[1] * n[1], dk_[2] * n[2]};
  }

  // Flat index of -k. Only meaningful for retained modes (Nyquist excluded).
  std::size_t negate(std::size_t idx) const {
    const auto n = mode_numbers(idx);
    return index_of({-n[0], -n[1], -n[2]});
  }

  // One representative of each {k, -k} pair: n3 > 0, or n3 == 0 and n1 > 0,
  // or n3 == n1 == 0 and n2 > 0. k = 0 is not canonical.
  bool canonical(std::size_t idx) const {
    const auto n = mode_numbers(idx);
    if (n[2] != 0) return n[2] > 0;
    if (n[0] != 0) return n[0] > 0;
    return n[1] > 0;
  }

  bool retained(std::size_t idx) const { return tables_->mask[idx] != 0; }
  // Retained flat indices in ascending order (includes k = 0).
  const std::vector<std::size_t> &retained_indices() const {
    return tables_->retained;
  }
  // Radius of the retained ball; +inf for DealiasRule::None.
  double cutoff_wavenumber() const { return cutoff_; }

  bool same_shape(const Lattice &o) const {
    return N_ == o.N_ && L_ == o.L_ && rule_ == o.rule_;
  }

private:
  struct Tables {
    std::vector<unsigned char> mask;
    std::vector<std::size_t> retained;
  };

  static int signed_mode(int i, int n) { return i < n / 2 ? i : i - n; }
  static int wrap(int m, int n) { return m >= 0 ? m : m + n; }

  void build_tables() {
    auto t = std::make_shared<Tables>();
    const std::size_t total = size();
    t->mask.assign(total, 0);
    if (rule_ == DealiasRule::TwoThirdsSphere) {
      cutoff_ = std::min({dk_[0] * N_[0] / 3.0, dk_[1] * N_[1] / 3.0,
                          dk_[2] * N_[2] / 3.0});
    } else {
      cutoff_ = std::numeric_limits<double>::infinity();
    }
    for (std::size_t idx = 0; idx < total; ++idx) {
      const auto n = mode_numbers(idx);
      bool keep = true;
      for (int i = 0; i < 3; ++i)
        if (n[i] == -N_[i] / 2) keep = false;
      if (keep && rule_ == DealiasRule::TwoThirdsSphere) {
        // Strict per-axis |n_i| < N_i/3 is implied by the ball; test both so
        // round-off at the ball boundary cannot admit an aliasing mode.
        for (int i = 0; i < 3; ++i)
          if (3 * std::abs(n[i]) >= N_[i]) keep = false;
        if (keep) {
          const Vec3 k{dk_[0] * n[0], dk_[1] * n[1], dk_[2] * n[2]};
          keep = norm(k) < cutoff_;
        }
      }
      if (keep) {
        t->mask[idx] = 1;
        t->retained.push_back(idx);
      }
    }
    tables_ = std::move(t);
  }

  std::array<double, 3> L_;
  std::array<int, 3> N_;
  DealiasRule rule_;
  std::array<double, 3> dk_{};
  double cutoff_ = 0.0;
  std::shared_ptr<const Tables> tables_;
};

} // namespace spb
