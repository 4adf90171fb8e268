#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spb/field.hpp"

namespace spb {

enum class ForcingKind { Zero, Steady, Periodic, Stochastic };

inline std::string to_string(ForcingKind k) {
  switch (k) {
  case ForcingKind::Zero: return "zero";
  case ForcingKind::Steady: return "steady";
  case ForcingKind::Periodic: return "periodic";
  case ForcingKind::Stochastic: return "stochastic";
  }
  return "zero";
}

inline ForcingKind forcing_kind_from_string(const std::string &s) {
  if (s == "zero") return ForcingKind::Zero;
  if (s == "steady") return ForcingKind::Steady;
  if (s == "periodic") return ForcingKind::Periodic;
  if (s == "stochastic") return ForcingKind::Stochastic;
  throw ConfigError("unknown forcing variant '" + s + "'");
}

struct ForcingSpec {
  ForcingKind kind = ForcingKind::Zero;
  double k_lo = 1.0;
  double k_hi = 2.0;
  // Per-mode magnitude |f^(k)| (steady/periodic) or its stationary rms
  // (stochastic).
  double amplitude = 0.0;
  std::uint64_t seed = 0;
  double correlation_time = 1.0; // stochastic
  double period = 1.0;           // periodic
  double sample_interval = 0.01; // stochastic process grid spacing
  // When set, every sample is scaled so |f^(k,t)| <= nu |k| bound_R1.
  bool enforce_bound = false;
  double bound_R1 = 0.0;
};

// Divergence-free, Hermitian, mean-free force f^(k,t) supported on the shell
// k_lo <= |k| <= k_hi. The stochastic variant is an Ornstein-Uhlenbeck
// process per mode on a fixed time grid, linearly interpolated in between,
// and is a deterministic function of (seed, t).
class ForcingModel {
public:
  ForcingModel(const Lattice &lat, ForcingSpec spec, double nu)
      : lat_(lat), spec_(spec), nu_(nu) {
    if (spec_.kind != ForcingKind::Zero) {
      if (!(spec_.amplitude >= 0.0)) throw ConfigError("forcing amplitude < 0");
      if (!(spec_.k_hi >= spec_.k_lo) || spec_.k_lo <= 0.0)
        throw ConfigError("forcing shell must satisfy 0 < k_lo <= k_hi");
    }
    if (spec_.kind == ForcingKind::Stochastic &&
        (!(spec_.correlation_time > 0.0) || !(spec_.sample_interval > 0.0)))
      throw ConfigError("stochastic forcing needs positive correlation time "
                        "and sample interval");
    if (spec_.kind == ForcingKind::Periodic && !(spec_.period > 0.0))
      throw ConfigError("periodic forcing needs a positive period");
    if (spec_.enforce_bound && !(spec_.bound_R1 > 0.0))
      throw ConfigError("bound enforcement requires bound_R1 > 0");
    for (std::size_t idx : lat_.retained_indices()) {
      if (!lat_.canonical(idx)) continue;
      const double kn = norm(lat_.wavevector(idx));
      if (kn >= spec_.k_lo && kn <= spec_.k_hi) support_.push_back(idx);
    }
    if (spec_.kind == ForcingKind::Steady || spec_.kind == ForcingKind::Periodic)
      build_profile();
  }

  static ForcingModel zero(const Lattice &lat) {
    return ForcingModel(lat, ForcingSpec{}, 0.0);
  }

  const ForcingSpec &spec() const { return spec_; }
  const Lattice &lattice() const { return lat_; }
  bool is_zero() const {
    return spec_.kind == ForcingKind::Zero || spec_.amplitude == 0.0 ||
           support_.empty();
  }

  SpectralField sample(double t) const {
    SpectralField f(lat_, t);
    if (is_zero()) return f;
    switch (spec_.kind) {
    case ForcingKind::Zero: break;
    case ForcingKind::Steady:
      for (std::size_t i = 0; i < support_.size(); ++i)
        f.set_pair(support_[i], profile_[i]);
      break;
    case ForcingKind::Periodic: {
      const double c = std::cos(two_pi * t / spec_.period);
      for (std::size_t i = 0; i < support_.size(); ++i)
        f.set_pair(support_[i], c * profile_[i]);
      break;
    }
    case ForcingKind::Stochastic: sample_ou(t, f); break;
    }
    if (spec_.enforce_bound) clip(f);
    return f;
  }

  // df^/dt where it is known in closed form (zero, steady, unclipped
  // periodic); empty for forcing that is only piecewise smooth in time.
  std::optional<SpectralField> rate(double t) const {
    SpectralField r(lat_, t);
    if (is_zero() || spec_.kind == ForcingKind::Steady) return r;
    if (spec_.kind != ForcingKind::Periodic || spec_.enforce_bound) return std::nullopt;
    const double w = two_pi / spec_.period;
    const double c = -w * std::sin(w * t);
    for (std::size_t i = 0; i < support_.size(); ++i) r.set_pair(support_[i], c * profile_[i]);
    return r;
  }

private:
  CVec3 unit_solenoidal(std::mt19937_64 &rng, std::size_t idx) const {
    const Vec3 k = lat_.wavevector(idx);
    CVec3 z = leray_project(k, random_complex_vector(rng));
    return z;
  }

  void build_profile() {
    std::mt19937_64 rng(spec_.seed);
    profile_.clear();
    for (std::size_t idx : support_) {
      CVec3 z = unit_solenoidal(rng, idx);
      const double n = norm(z);
      z *= cplx(spec_.amplitude / n, 0.0);
      profile_.push_back(z);
    }
  }

  void reset_ou() const {
    rng_.seed(spec_.seed);
    hist_.clear();
    // Stationary start: E|X|^2 = amplitude^2 (the projected draw has
    // E|z|^2 = 2).
    const double s = spec_.amplitude / std::sqrt(2.0);
    std::vector<CVec3> x0(support_.size());
    for (std::size_t i = 0; i < support_.size(); ++i)
      x0[i] = s * unit_solenoidal(rng_, support_[i]);
    hist_.push_back(std::move(x0));
    hist_base_ = 0;
  }

  void advance() const {
    const double a = std::exp(-spec_.sample_interval / spec_.correlation_time);
    const double b = spec_.amplitude * std::sqrt((1.0 - a * a) / 2.0);
    const std::vector<CVec3> &src = hist_.back();
    std::vector<CVec3> dst(support_.size());
    for (std::size_t i = 0; i < support_.size(); ++i)
      dst[i] = a * src[i] + b * unit_solenoidal(rng_, support_[i]);
    hist_.push_back(std::move(dst));
  }

  void sample_ou(double t, SpectralField &f) const {
    const double s = std::max(t, 0.0) / spec_.sample_interval;
    long m = static_cast<long>(std::floor(s));
    if (s - static_cast<double>(m) > 1.0 - 1e-9) ++m;
    const double w = std::clamp(s - static_cast<double>(m), 0.0, 1.0);
    if (hist_.empty() || m < hist_base_) reset_ou();
    while (hist_base_ + static_cast<long>(hist_.size()) <= m + 1) advance();
    // A short window behind m covers Runge-Kutta stages that step back.
    while (hist_base_ < m - 4) {
      hist_.pop_front();
      ++hist_base_;
    }
    const auto &x0 = hist_[static_cast<std::size_t>(m - hist_base_)];
    const auto &x1 = hist_[static_cast<std::size_t>(m + 1 - hist_base_)];
    for (std::size_t i = 0; i < support_.size(); ++i)
      f.set_pair(support_[i], (1.0 - w) * x0[i] + w * x1[i]);
  }

  void clip(SpectralField &f) const {
    for (std::size_t idx : support_) {
      const double cap = nu_ * norm(lat_.wavevector(idx)) * spec_.bound_R1;
      const double a = norm(f[idx]);
      if (a > cap) f.set_pair(idx, (cap / a) * f[idx]);
    }
  }

  Lattice lat_;
  ForcingSpec spec_;
  double nu_;
  std::vector<std::size_t> support_; // canonical modes on the shell
  std::vector<CVec3> profile_;

  // Stochastic process values at grid points hist_base_, hist_base_ + 1, ...
  mutable std::mt19937_64 rng_;
  mutable std::deque<std::vector<CVec3>> hist_;
  mutable long hist_base_ = 0;
};

// ||f||_{H^-1 dot}^2 = sum_{k != 0} |f^(k)|^2 / |k|^2 (Plancherel-normalized).
inline double hminus1_norm2(const SpectralField &f) {
  const auto &lat = f.lattice();
  AccurateSum s;
  for (std::size_t idx : lat.retained_indices()) {
    if (idx == 0) continue;
    s.add(norm2(f[idx]) / norm2(lat.wavevector(idx)));
  }
  return lat.volume() / (two_pi * two_pi * two_pi) * s.value() *
         lat.dual_cell_volume();
}

// sup_{k != 0} |f^(k)| / |k|
inline double max_force_over_k(const SpectralField &f) {
  const auto &lat = f.lattice();
  double m = 0.0;
  for (std::size_t idx : lat.retained_indices()) {
    if (idx == 0) continue;
    m = std::max(m, norm(f[idx]) / norm(lat.wavevector(idx)));
  }
  return m;
}

// Running time integrals of |f^(k,t)|^2 (trapezoidal) and derived statistics
//   F1(k,T) = (int_0^T |f^(k,t)|^2 dt)^{1/2},  F_inf(T) = sup_k F1(k,T),
//   F^2(T) = sum_{k != 0} F1^2(k,T) / |k|^2.
class ForceStats {
public:
  explicit ForceStats(const Lattice &lat)
      : lat_(lat), integral_(lat.size(), 0.0), last_(lat.size(), 0.0) {}

  void start(const SpectralField &f) {
    for (std::size_t idx : lat_.retained_indices()) last_[idx] = norm2(f[idx]);
    started_ = true;
    observe(f);
  }

  void update(const SpectralField &f, double dt) {
    if (!(dt > 0.0)) throw Error("force statistics need dt > 0");
    if (!started_) throw Error("force statistics used before start()");
    for (std::size_t idx : lat_.retained_indices()) {
      const double cur = norm2(f[idx]);
      integral_[idx] += 0.5 * dt * (last_[idx] + cur);
      last_[idx] = cur;
    }
    T_ += dt;
    observe(f);
  }

  // Track running suprema for samples that do not enter the integrals
  // (intermediate Runge-Kutta stage times).
  void observe(const SpectralField &f) {
    sup_over_k_ = std::max(sup_over_k_, max_force_over_k(f));
    sup_hminus1_ = std::max(sup_hminus1_, std::sqrt(hminus1_norm2(f)));
  }

  bool started() const { return started_; }
  double time() const { return T_; }
  double F1(std::size_t idx) const { return std::sqrt(integral_[idx]); }
  double F_inf() const {
    double m = 0.0;
    for (std::size_t idx : lat_.retained_indices())
      m = std::max(m, integral_[idx]);
    return std::sqrt(m);
  }
  double F2() const {
    AccurateSum s;
    for (std::size_t idx : lat_.retained_indices()) {
      if (idx == 0) continue;
      s.add(integral_[idx] / norm2(lat_.wavevector(idx)));
    }
    return s.value();
  }
  // sup over observed samples of sup_k |f^(k,t)|/|k|.
  double sup_force_over_k() const { return sup_over_k_; }
  double sup_hminus1() const { return sup_hminus1_; }

private:
  Lattice lat_;
  std::vector<double> integral_;
  std::vector<double> last_;
  bool started_ = false;
  double T_ = 0.0;
  double sup_over_k_ = 0.0;
  double sup_hminus1_ = 0.0;
};

} // namespace spb
