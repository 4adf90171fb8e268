#pragma once

#include <cmath>
#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spb/forcing.hpp"
#include "spb/transform.hpp"

namespace spb {

struct CflViolation : Error {
  using Error::Error;
};

// Thrown when a step produces NaN/Inf. Carries the state before the step.
struct NonFiniteState : Error {
  NonFiniteState(const std::string &what, SpectralField last_good)
      : Error(what),
        last_good(std::make_shared<SpectralField>(std::move(last_good))) {}
  std::shared_ptr<const SpectralField> last_good;
};

struct SolverOptions {
  bool nonlinear = true; // off gives the linear Stokes problem
  double cfl = 0.5;
  double top_shell_warning = 0.01;
};

// Time integrals and force statistics carried alongside the field.
struct SolverState {
  SpectralField field;
  double nu = 0.0;
  double dissipation = 0.0; // D(t) = nu int ||grad u||^2
  double work = 0.0;        // W(t) = int int u.f
  long steps = 0;
  double dt = 0.0;
  double initial_energy = 0.0; // 1/2 ||u0||^2
  ForceStats force_stats;
  bool resolution_warning = false;
  // Explicit part (nonlinear term + force) and max|u| at the current field,
  // computed at the end of the previous step and reused by the next one.
  std::optional<SpectralField> explicit_cache;
  SpectralField cache_source;
  double cache_speed = 0.0;

  SolverState(SpectralField u0, double viscosity)
      : field(std::move(u0)), nu(viscosity),
        initial_energy(0.5 * plancherel_energy(field)),
        force_stats(field.lattice()), cache_source(field.lattice()) {}
};

// Summary of the force statistics at one instant.
struct ForceSummary {
  double T = 0.0;
  double F2 = 0.0;
  double F_inf = 0.0;
  double sup_force_over_k = 0.0;
  double sup_hminus1 = 0.0;
};

inline ForceSummary summarize(const ForceStats &s) {
  return {s.time(), s.F2(), s.F_inf(), s.sup_force_over_k(), s.sup_hminus1()};
}

struct Checkpoint {
  SpectralField field;
  double dissipation = 0.0;
  double work = 0.0;
  ForceSummary force;
};

struct Trajectory {
  double nu = 0.0;
  std::vector<Checkpoint> checkpoints;

  void record(const SolverState &s) {
    checkpoints.push_back(
        {s.field, s.dissipation, s.work, summarize(s.force_stats)});
  }
  double initial_energy() const {
    return checkpoints.empty()
               ? 0.0
               : 0.5 * plancherel_energy(checkpoints.front().field);
  }
};

// residual(t) = 1/2 ||u(t)||^2 + D(t) - W(t) - 1/2 ||u0||^2
inline double energy_residual(const Checkpoint &c, double initial_energy) {
  return 0.5 * plancherel_energy(c.field) + c.dissipation - c.work -
         initial_energy;
}

// Worst (largest signed) residual over the checkpoints.
inline double energy_inequality_residual(const Trajectory &tr) {
  if (tr.checkpoints.empty()) return 0.0;
  const double e0 = tr.initial_energy();
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto &c : tr.checkpoints)
    worst = std::max(worst, energy_residual(c, e0));
  return worst;
}

// Fraction of the energy in the outermost retained shell of width
// min dual spacing.
inline double top_shell_energy_fraction(const SpectralField &f) {
  const auto &lat = f.lattice();
  const double K = lat.cutoff_wavenumber();
  if (!std::isfinite(K)) return 0.0;
  const double edge = K - lat.min_dual_spacing();
  AccurateSum top, all;
  for (std::size_t idx : lat.retained_indices()) {
    const double e = norm2(f[idx]);
    all.add(e);
    if (norm(lat.wavevector(idx)) >= edge) top.add(e);
  }
  return all.value() > 0.0 ? top.value() / all.value() : 0.0;
}

inline bool all_finite(const SpectralField &f) {
  for (const CVec3 &z : f.data())
    for (const cplx &c : z)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

// Pseudo-spectral Galerkin Navier-Stokes on the retained modes:
//   d/dt u^ = -nu |k|^2 u^ - i Pi_k sum_l k_l (u_l u_j)^ + f^
// with the quadratic product evaluated on the grid and truncated to the
// retained (alias-free) set.
class NavierStokes {
public:
  NavierStokes(const Lattice &lat, double nu, ForcingModel forcing,
               SolverOptions opts = {})
      : lat_(lat), nu_(nu), forcing_(std::move(forcing)), opts_(opts),
        fft_(lat), decay_(lat.size(), 0.0) {
    if (!(nu_ >= 0.0) || !std::isfinite(nu_))
      throw ConfigError("viscosity must be finite and >= 0");
    if (!forcing_.lattice().same_shape(lat_))
      throw ResolutionMismatch("forcing lattice does not match solver lattice");
    for (std::size_t idx : lat_.retained_indices())
      decay_[idx] = nu_ * norm2(lat_.wavevector(idx));
  }

  const Lattice &lattice() const { return lat_; }
  double nu() const { return nu_; }
  const ForcingModel &forcing() const { return forcing_; }
  const SolverOptions &options() const { return opts_; }

  SolverState initial_state(const SpectralField &u0) const {
    if (!u0.lattice().same_shape(lat_))
      throw ResolutionMismatch("initial field lattice does not match solver");
    return SolverState(u0, nu_);
  }

  // -i Pi_k sum_l k_l (u_l u_j)^(k). Optionally reports max |u| on the grid.
  SpectralField nonlinear_term(const SpectralField &u,
                               double *max_speed = nullptr) {
    std::vector<CVec3> T = convective_flux(u, max_speed);
    SpectralField out(lat_, u.time());
    const cplx minus_i(0.0, -1.0);
    for (std::size_t idx : lat_.retained_indices()) {
      if (idx == 0 || !lat_.canonical(idx)) continue;
      out.set_pair(idx, minus_i * leray_project(lat_.wavevector(idx), T[idx]));
    }
    return out;
  }

  // X(u)_k = -nu |k|^2 u^ + nonlinear + f^(k,t)
  SpectralField rhs(const SpectralField &u, double t) {
    SpectralField x = opts_.nonlinear ? nonlinear_term(u) : SpectralField(lat_);
    const SpectralField f = forcing_.sample(t);
    for (std::size_t idx : lat_.retained_indices())
      x[idx] += f[idx] - decay_[idx] * u[idx];
    x.set_time(t);
    return x;
  }

  // p^(k) = -k.T(k)/|k|^2 with T_j = sum_l k_l (u_l u_j)^, p^(0) = 0, so
  // -i T - i k p^ = -i Pi_k T. Dense array in lattice order.
  std::vector<cplx> recover_pressure(const SpectralField &u) {
    std::vector<CVec3> T = convective_flux(u, nullptr);
    std::vector<cplx> p(lat_.size(), cplx{});
    for (std::size_t idx : lat_.retained_indices()) {
      if (idx == 0 || !lat_.canonical(idx)) continue;
      const Vec3 k = lat_.wavevector(idx);
      const cplx v = -dot(k, T[idx]) / norm2(k);
      p[idx] = v;
      p[lat_.negate(idx)] = std::conj(v);
    }
    return p;
  }

  // Unprojected tendency -i sum_l k_l (u_l u_j)^ (for pressure consistency).
  SpectralField raw_convection(const SpectralField &u) {
    std::vector<CVec3> T = convective_flux(u, nullptr);
    SpectralField out(lat_, u.time());
    const cplx minus_i(0.0, -1.0);
    for (std::size_t idx : lat_.retained_indices()) {
      if (idx == 0 || !lat_.canonical(idx)) continue;
      out.set_pair(idx, minus_i * T[idx]);
    }
    return out;
  }

  double max_speed(const SpectralField &u) {
    return max_speed(fft_.to_physical(u));
  }

  double cfl_limit(double speed) const {
    return speed > 0.0 ? opts_.cfl * lat_.min_grid_spacing() / speed
                       : std::numeric_limits<double>::infinity();
  }

  // One integrating-factor SSP-RK3 step (E(s) = exp(-nu |k|^2 s)):
  //   u1 = E(dt) [u + dt G(u, t)]
  //   u2 = 3/4 E(dt/2) u + 1/4 E(-dt/2) [u1 + dt G(u1, t+dt)]
  //   u' = 1/3 E(dt) u + 2/3 E(dt/2) [u2 + dt G(u2, t+dt/2)]
  // G = nonlinear term + force. D and W advance by the trapezoidal rule with
  // the endpoint derivative correction dt^2/12 (g'(t) - g'(t+dt)), which
  // telescopes to fourth order in dt for smooth g.
  void step(SolverState &s, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
      throw ConfigError("time step must be positive and finite");
    const SpectralField &u = s.field;
    const double t = u.time();

    double speed = 0.0;
    const bool cached = s.explicit_cache && s.explicit_cache->time() == t &&
                        s.cache_source.time() == t &&
                        std::equal(u.data().begin(), u.data().end(),
                                   s.cache_source.data().begin());
    SpectralField g0 = cached ? *s.explicit_cache : explicit_part(u, t, &speed);
    if (cached) speed = s.cache_speed;
    const double limit = cfl_limit(speed);
    if (dt > limit)
      throw CflViolation("dt = " + std::to_string(dt) +
                         " exceeds the CFL limit " + std::to_string(limit) +
                         " (max|u| = " + std::to_string(speed) + ")");

    const SpectralField f0 = forcing_.sample(t);
    if (!s.force_stats.started()) s.force_stats.start(f0);
    const double grad0 = gradient_norm2(u);
    const double power0 = l2_inner(u, f0);

    std::vector<double> e_full(lat_.size()), e_half(lat_.size());
    for (std::size_t idx : lat_.retained_indices()) {
      e_full[idx] = std::exp(-decay_[idx] * dt);
      e_half[idx] = std::exp(-decay_[idx] * 0.5 * dt);
    }
    const auto &ret = lat_.retained_indices();

    SpectralField u1(lat_, t + dt);
    for (std::size_t idx : ret)
      u1[idx] = e_full[idx] * (u[idx] + dt * g0[idx]);

    SpectralField g1 = explicit_part(u1, t + dt, nullptr);
    SpectralField u2(lat_, t + 0.5 * dt);
    for (std::size_t idx : ret)
      u2[idx] = 0.75 * e_half[idx] * u[idx] +
                (0.25 / e_half[idx]) * (u1[idx] + dt * g1[idx]);

    SpectralField g2 = explicit_part(u2, t + 0.5 * dt, nullptr);
    SpectralField next(lat_, t + dt);
    for (std::size_t idx : ret)
      next[idx] = (1.0 / 3.0) * e_full[idx] * u[idx] +
                  (2.0 / 3.0) * e_half[idx] * (u2[idx] + dt * g2[idx]);
    next = project_solenoidal(std::move(next));
    next.set_time(t + dt);

    if (!all_finite(next))
      throw NonFiniteState("non-finite field at t = " + std::to_string(t + dt),
                           u);

    const SpectralField f1 = forcing_.sample(t + dt);
    s.force_stats.observe(forcing_.sample(t + 0.5 * dt));
    s.force_stats.update(f1, dt);

    double speed1 = 0.0;
    SpectralField g_end = explicit_part(next, t + dt, &speed1);
    const SpectralField ut0 = time_derivative(u, g0);
    const SpectralField ut1 = time_derivative(next, g_end);
    const double h2 = dt * dt / 12.0;
    s.dissipation += 0.5 * dt * nu_ * (grad0 + gradient_norm2(next)) +
                     h2 * 2.0 * nu_ * (gradient_inner(u, ut0) - gradient_inner(next, ut1));
    double dwork = 0.5 * dt * (power0 + l2_inner(next, f1));
    const auto r0 = forcing_.rate(t);
    const auto r1 = forcing_.rate(t + dt);
    if (r0 && r1)
      dwork += h2 * (l2_inner(ut0, f0) + l2_inner(u, *r0) - l2_inner(ut1, f1) -
                     l2_inner(next, *r1));
    s.work += dwork;

    s.cache_source = next;
    s.explicit_cache = std::move(g_end);
    s.cache_speed = speed1;
    s.field = std::move(next);
    s.dt = dt;
    ++s.steps;
    if (top_shell_energy_fraction(s.field) > opts_.top_shell_warning)
      s.resolution_warning = true;
  }

private:
  // du/dt = G - nu |k|^2 u
  SpectralField time_derivative(const SpectralField &u, const SpectralField &g) const {
    SpectralField d(lat_, u.time());
    for (std::size_t idx : lat_.retained_indices()) d[idx] = g[idx] - decay_[idx] * u[idx];
    return d;
  }

  SpectralField explicit_part(const SpectralField &u, double t,
                              double *speed) {
    SpectralField g = opts_.nonlinear ? nonlinear_term(u, speed)
                                      : SpectralField(lat_, t);
    if (!opts_.nonlinear && speed) *speed = max_speed(u);
    if (!forcing_.is_zero()) g += forcing_.sample(t);
    return g;
  }

  static double max_speed(const PhysicalField &p) {
    double m = 0.0;
    for (std::size_t i = 0; i < p.comp[0].size(); ++i)
      m = std::max(m, p.comp[0][i] * p.comp[0][i] + p.comp[1][i] * p.comp[1][i] +
                          p.comp[2][i] * p.comp[2][i]);
    return std::sqrt(m);
  }

  // T_j(k) = sum_l k_l (u_l u_j)^(k) on canonical retained modes.
  std::vector<CVec3> convective_flux(const SpectralField &u, double *speed) {
    if (!u.lattice().same_shape(lat_))
      throw ResolutionMismatch("field lattice does not match solver");
    const PhysicalField p = fft_.to_physical(u);
    if (speed) *speed = max_speed(p);
    std::vector<CVec3> T(lat_.size(), CVec3{});
    std::vector<double> prod(lat_.size());
    const double scale = fft_.forward_scale();
    for (int l = 0; l < 3; ++l)
      for (int j = l; j < 3; ++j) {
        for (std::size_t i = 0; i < prod.size(); ++i)
          prod[i] = p.comp[l][i] * p.comp[j][i];
        fft_.forward_in_place(prod);
        for (std::size_t idx : lat_.retained_indices()) {
          if (idx == 0 || !lat_.canonical(idx)) continue;
          const Vec3 k = lat_.wavevector(idx);
          const cplx q = fft_.half_value(idx) * scale;
          T[idx][j] += k[l] * q;
          if (j != l) T[idx][l] += k[j] * q;
        }
      }
    return T;
  }

  Lattice lat_;
  double nu_;
  ForcingModel forcing_;
  SolverOptions opts_;
  Transform fft_;
  std::vector<double> decay_; // nu |k|^2
};

// Steps from s until t_end, recording s at t = 0 and every `cadence` steps
// (and at the final step).
inline Trajectory integrate(NavierStokes &ns, SolverState &s, double dt,
                            long n_steps, long cadence) {
  if (cadence <= 0) throw ConfigError("checkpoint cadence must be positive");
  Trajectory tr;
  tr.nu = ns.nu();
  tr.record(s);
  for (long n = 1; n <= n_steps; ++n) {
    ns.step(s, dt);
    if (n % cadence == 0 || n == n_steps) tr.record(s);
  }
  return tr;
}

} // namespace spb
