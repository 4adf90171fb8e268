#include "catch_amalgamated.hpp"

#include "spb/dynamics.hpp"
#include "spb/oracle.hpp"

using namespace spb;
using Catch::Approx;

namespace {

double max_coeff(const SpectralField &f) {
  double m = 0.0;
  for (const auto &z : f.data()) m = std::max(m, norm(z));
  return m;
}

// Scale of the quadratic term, max|k| * (max|u^|)^2 * (#modes) / sqrt(V).
double quadratic_scale(const SpectralField &u) {
  const auto &lat = u.lattice();
  return lat.cutoff_wavenumber() * max_coeff(u) * max_coeff(u) *
         static_cast<double>(lat.retained_indices().size()) /
         std::sqrt(lat.volume());
}

SpectralField random_field(const Lattice &lat, std::uint64_t seed) {
  return random_solenoidal(lat, seed, 0.0, 1e9, 0.0, 1.0);
}

} // namespace

TEST_CASE("nonlinear term of the zero field vanishes") {
  const Lattice lat = Lattice::cube(8);
  NavierStokes ns(lat, 0.1, ForcingModel::zero(lat));
  CHECK(max_coeff(ns.nonlinear_term(SpectralField(lat))) == 0.0);
}

TEST_CASE("nonlinear term matches the direct convolution") {
  const std::vector<std::pair<std::array<double, 3>, std::array<int, 3>>> boxes{
      {{two_pi, two_pi, two_pi}, {8, 8, 8}},
      {{two_pi, two_pi, two_pi}, {4, 4, 4}},
      {{1.0, 2.0, 3.0}, {8, 6, 4}},
      {{3.0, 1.5, 2.0}, {6, 8, 8}}};
  for (const auto &[L, N] : boxes) {
    const Lattice lat(L, N);
    NavierStokes ns(lat, 0.0, ForcingModel::zero(lat));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SpectralField u = random_field(lat, seed);
      const SpectralField fast = ns.nonlinear_term(u);
      const SpectralField slow = brute_force_nonlinear(u);
      CHECK(relative_max_difference(fast, slow) <= 1e-12);
      CHECK(divergence_residual(fast) <= divergence_tolerance);
      CHECK(hermitian_residual(fast) == 0.0);
    }
  }
}

TEST_CASE("Beltrami fields have no projected nonlinearity") {
  const Lattice lat = Lattice::cube(16);
  NavierStokes ns(lat, 0.0, ForcingModel::zero(lat));
  for (double r : {1.0, std::sqrt(2.0), std::sqrt(5.0)}) {
    for (int sign : {-1, 1}) {
      const SpectralField u = beltrami_shell(lat, r, sign, 3, 1.0);
      REQUIRE(plancherel_energy(u) > 0.0);
      CHECK(max_coeff(ns.nonlinear_term(u)) <= 1e-13 * quadratic_scale(u));
      CHECK(max_coeff(brute_force_nonlinear(u)) <= 1e-13 * quadratic_scale(u));
    }
  }
  const SpectralField abc = abc_flow(lat, 1.0, 0.7, 0.4);
  CHECK(max_coeff(ns.nonlinear_term(abc)) <= 1e-13 * quadratic_scale(abc));
}

TEST_CASE("ABC flow is a curl eigenfield") {
  const Lattice lat = Lattice::cube(8);
  const SpectralField u = abc_flow(lat, 1.0, 0.7, 0.4);
  for (std::size_t idx : lat.retained_indices()) {
    const Vec3 k = lat.wavevector(idx);
    const CVec3 &h = u[idx];
    const CVec3 curl{cplx(0, 1) * (k[1] * h[2] - k[2] * h[1]),
                     cplx(0, 1) * (k[2] * h[0] - k[0] * h[2]),
                     cplx(0, 1) * (k[0] * h[1] - k[1] * h[0])};
    CHECK(norm(curl - h) <= 1e-14);
  }
  // Physical values against the closed form at a few grid points.
  Transform fft(lat);
  const PhysicalField p = fft.to_physical(u);
  const double h = two_pi / 8;
  for (int i : {0, 3, 5})
    for (int j : {1, 4})
      for (int k : {2, 7}) {
        const double x = i * h, y = j * h, z = k * h;
        const std::size_t f = lat.flat(i, j, k);
        CHECK(p.comp[0][f] == Approx(std::sin(z) + 0.4 * std::cos(y)).margin(1e-14));
        CHECK(p.comp[1][f] == Approx(0.7 * std::sin(x) + std::cos(z)).margin(1e-14));
        CHECK(p.comp[2][f] == Approx(0.4 * std::sin(y) + 0.7 * std::cos(x)).margin(1e-14));
      }
}

TEST_CASE("nonlinear term conserves energy") {
  const Lattice lat = Lattice::cube(16);
  NavierStokes ns(lat, 0.0, ForcingModel::zero(lat));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SpectralField u = random_solenoidal(lat, seed, 1.0, 4.0, 1.0, 1.0);
    const SpectralField n = ns.nonlinear_term(u);
    double s = 0.0, scale = 0.0;
    for (std::size_t idx : lat.retained_indices()) {
      s += std::real(cdot(u[idx], n[idx]));
      scale += norm(u[idx]) * norm(n[idx]);
    }
    CHECK(std::abs(s) <= 1e-12 * scale);
  }
}

TEST_CASE("rhs composition") {
  const Lattice lat = Lattice::cube(16);
  {
    NavierStokes ns(lat, 0.0, ForcingModel::zero(lat));
    const SpectralField u = beltrami_shell(lat, std::sqrt(3.0), 1, 9, 1.0);
    CHECK(max_coeff(ns.rhs(u, 0.0)) <= 1e-13 * quadratic_scale(u));
    CHECK(max_coeff(ns.rhs(SpectralField(lat), 0.0)) == 0.0);
  }
  {
    ForcingSpec spec;
    spec.kind = ForcingKind::Steady;
    spec.amplitude = 0.3;
    spec.k_lo = 1.0;
    spec.k_hi = 2.0;
    spec.seed = 4;
    SolverOptions opts;
    opts.nonlinear = false;
    const double nu = 0.05;
    NavierStokes ns(lat, nu, ForcingModel(lat, spec, nu), opts);
    const SpectralField u = random_field(lat, 2);
    const SpectralField x = ns.rhs(u, 0.7);
    const SpectralField f = ns.forcing().sample(0.7);
    double worst = 0.0;
    for (std::size_t idx : lat.retained_indices()) {
      const CVec3 expect =
          f[idx] - (nu * norm2(lat.wavevector(idx))) * u[idx];
      worst = std::max(worst, norm(x[idx] - expect));
    }
    CHECK(worst == 0.0);
  }
}

TEST_CASE("pure viscous decay of a single mode is exact") {
  const Lattice lat = Lattice::cube(16);
  const double nu = 0.3, dt = 0.01;
  NavierStokes ns(lat, nu, ForcingModel::zero(lat));
  SpectralField u(lat);
  const std::size_t idx = lat.index_of({2, -1, 3});
  const Vec3 k = lat.wavevector(idx);
  u.set_pair(idx, leray_project(k, CVec3{cplx(1.0, 0.5), cplx(-0.2, 0.1), cplx(0.3, 0.0)}));
  SolverState s = ns.initial_state(u);
  const CVec3 before = s.field[idx];
  ns.step(s, dt);
  const CVec3 expect = std::exp(-nu * norm2(k) * dt) * before;
  CHECK(norm(s.field[idx] - expect) <= 1e-15 * norm(before));
}

TEST_CASE("Beltrami run follows the exact decay") {
  const Lattice lat = Lattice::cube(16);
  const double nu = 0.1, dt = 0.01;
  NavierStokes ns(lat, nu, ForcingModel::zero(lat));
  const SpectralField u0 = beltrami_shell(lat, std::sqrt(2.0), -1, 5, 1.0);
  SolverState s = ns.initial_state(u0);
  for (int n = 0; n < 100; ++n) ns.step(s, dt);
  const double t = s.field.time();
  CHECK(t == Approx(1.0).epsilon(1e-12));
  double diff = 0.0, scale = 0.0;
  for (std::size_t idx : lat.retained_indices()) {
    const CVec3 exact = std::exp(-nu * norm2(lat.wavevector(idx)) * t) * u0[idx];
    diff = std::max(diff, norm(s.field[idx] - exact));
    scale = std::max(scale, norm(exact));
  }
  CHECK(diff / scale <= 1e-8);
}

TEST_CASE("solver keeps the field solenoidal and tracks dissipation") {
  const Lattice lat = Lattice::cube(16);
  ForcingSpec spec;
  spec.kind = ForcingKind::Stochastic;
  spec.amplitude = 0.05;
  spec.seed = 17;
  spec.correlation_time = 0.2;
  spec.sample_interval = 0.02;
  NavierStokes ns(lat, 0.05, ForcingModel(lat, spec, 0.05));
  SolverState s = ns.initial_state(random_solenoidal(lat, 8, 1.0, 4.0, 1.0, 1.0));
  double last_d = 0.0;
  for (int n = 0; n < 30; ++n) {
    ns.step(s, 0.01);
    CHECK(divergence_residual(s.field) <= divergence_tolerance);
    CHECK(hermitian_residual(s.field) == 0.0);
    CHECK(s.dissipation >= last_d);
    last_d = s.dissipation;
  }
  CHECK(s.steps == 30);
  CHECK(s.dissipation > 0.0);
}

TEST_CASE("viscous-only evolution contracts every mode") {
  const Lattice lat = Lattice::cube(16);
  SolverOptions opts;
  opts.nonlinear = false;
  NavierStokes ns(lat, 0.2, ForcingModel::zero(lat), opts);
  SolverState s = ns.initial_state(random_field(lat, 12));
  for (int n = 0; n < 10; ++n) {
    const SpectralField prev = s.field;
    ns.step(s, 0.02);
    for (std::size_t idx : lat.retained_indices()) {
      if (idx == 0 || norm(prev[idx]) == 0.0) continue;
      CHECK(norm(s.field[idx]) < norm(prev[idx]));
    }
  }
}

TEST_CASE("pressure recovery") {
  const Lattice lat = Lattice::cube(16);
  NavierStokes ns(lat, 0.1, ForcingModel::zero(lat));
  for (const cplx &c : ns.recover_pressure(SpectralField(lat))) CHECK(c == cplx{});

  // Beltrami flow: (u.grad)u = grad(|u|^2/2), so p = -|u|^2/2 + const.
  const double A = 1.0, B = 0.7, C = 0.4;
  const SpectralField u = abc_flow(lat, A, B, C);
  const std::vector<cplx> p = ns.recover_pressure(u);
  Transform fft(lat);
  std::vector<double> phys;
  fft.scalar_to_physical(p, phys);
  const double h = two_pi / 16;
  std::vector<double> expect(lat.size());
  double mean = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      for (int k = 0; k < 16; ++k) {
        const double x = i * h, y = j * h, z = k * h;
        const double u1 = A * std::sin(z) + C * std::cos(y);
        const double u2 = B * std::sin(x) + A * std::cos(z);
        const double u3 = C * std::sin(y) + B * std::cos(x);
        const double v = -0.5 * (u1 * u1 + u2 * u2 + u3 * u3);
        expect[lat.flat(i, j, k)] = v;
        mean += v;
      }
  mean /= static_cast<double>(lat.size());
  double worst = 0.0;
  for (std::size_t f = 0; f < lat.size(); ++f)
    worst = std::max(worst, std::abs(phys[f] - (expect[f] - mean)));
  CHECK(worst <= 1e-13);

  // Gradient of p restores the unprojected tendency.
  const SpectralField r = random_field(lat, 31);
  const std::vector<cplx> pr = ns.recover_pressure(r);
  const SpectralField raw = ns.raw_convection(r);
  const SpectralField projected = ns.nonlinear_term(r);
  double diff = 0.0, scale = 0.0;
  for (std::size_t idx : lat.retained_indices()) {
    const Vec3 k = lat.wavevector(idx);
    const cplx ip = cplx(0, 1) * pr[idx];
    const CVec3 with_p{raw[idx][0] - ip * k[0], raw[idx][1] - ip * k[1],
                       raw[idx][2] - ip * k[2]};
    diff = std::max(diff, norm(with_p - projected[idx]));
    scale = std::max(scale, norm(raw[idx]));
  }
  CHECK(diff <= 1e-12 * scale);
}

TEST_CASE("CFL and non-finite guards") {
  const Lattice lat = Lattice::cube(16);
  NavierStokes ns(lat, 0.1, ForcingModel::zero(lat));
  SolverState s = ns.initial_state(random_field(lat, 1));
  const double speed = ns.max_speed(s.field);
  CHECK_THROWS_AS(ns.step(s, 2.0 * ns.cfl_limit(speed)), CflViolation);
  CHECK(s.steps == 0);

  SpectralField bad = random_field(lat, 2);
  bad[lat.index_of({1, 0, 0})][1] = cplx(std::nan(""), 0.0);
  SolverState sb = ns.initial_state(bad);
  try {
    ns.step(sb, 1e-3);
    FAIL("expected NonFiniteState");
  } catch (const NonFiniteState &e) {
    REQUIRE(e.last_good);
    CHECK(e.last_good->time() == 0.0);
  }
  CHECK_THROWS_AS(ns.step(s, 0.0), ConfigError);
}

TEST_CASE("energy residual") {
  const Lattice lat = Lattice::cube(16);
  NavierStokes ns(lat, 0.1, ForcingModel::zero(lat));
  {
    SolverState s = ns.initial_state(SpectralField(lat));
    Trajectory tr = integrate(ns, s, 0.01, 20, 5);
    CHECK(tr.checkpoints.size() == 5);
    CHECK(energy_inequality_residual(tr) == 0.0);
  }
  {
    SolverState s = ns.initial_state(abc_flow(lat, 1.0, 1.0, 1.0));
    Trajectory tr = integrate(ns, s, 2.5e-3, 400, 40);
    CHECK(tr.checkpoints.size() == 11);
    const double e0 = tr.initial_energy();
    CHECK(std::abs(energy_inequality_residual(tr)) <= 1e-8 * e0);
  }
}

TEST_CASE("resolution warning flags energy in the top shell") {
  const Lattice lat = Lattice::cube(16);
  NavierStokes ns(lat, 0.01, ForcingModel::zero(lat));
  SolverState smooth = ns.initial_state(abc_flow(lat, 0.1, 0.1, 0.1));
  ns.step(smooth, 1e-3);
  CHECK_FALSE(smooth.resolution_warning);

  const double K = lat.cutoff_wavenumber();
  SolverState rough = ns.initial_state(random_solenoidal(lat, 3, K - 1.0, K, 0.0, 0.1));
  ns.step(rough, 1e-3);
  CHECK(rough.resolution_warning);
}
