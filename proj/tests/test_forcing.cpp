#include "catch_amalgamated.hpp"

#include "spb/forcing.hpp"

using namespace spb;
using Catch::Approx;

namespace {

ForcingSpec shell_spec(ForcingKind kind, std::uint64_t seed) {
  ForcingSpec s;
  s.kind = kind;
  s.k_lo = 1.0;
  s.k_hi = 2.0;
  s.amplitude = 0.4;
  s.seed = seed;
  s.correlation_time = 0.1;
  s.sample_interval = 0.01;
  s.period = 0.5;
  return s;
}

bool identical(const SpectralField &a, const SpectralField &b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

} // namespace

TEST_CASE("zero forcing samples to zero") {
  const Lattice lat = Lattice::cube(8);
  const ForcingModel m = ForcingModel::zero(lat);
  CHECK(m.is_zero());
  for (const auto &z : m.sample(1.3).data()) CHECK(norm(z) == 0.0);

  ForceStats st(lat);
  st.start(m.sample(0.0));
  for (int n = 1; n <= 10; ++n) st.update(m.sample(0.1 * n), 0.1);
  CHECK(st.F_inf() == 0.0);
  CHECK(st.F2() == 0.0);
  CHECK(st.sup_force_over_k() == 0.0);
}

TEST_CASE("every variant is solenoidal, Hermitian and shell-supported") {
  const Lattice lat({two_pi, 4.0, 5.0}, {12, 8, 8});
  for (auto kind : {ForcingKind::Steady, ForcingKind::Periodic, ForcingKind::Stochastic}) {
    const ForcingModel m(lat, shell_spec(kind, 3), 0.1);
    CHECK_FALSE(m.is_zero());
    for (double t : {0.0, 0.013, 0.25, 1.7}) {
      const SpectralField f = m.sample(t);
      CHECK(norm(f[0]) == 0.0);
      CHECK(divergence_residual(f) <= divergence_tolerance);
      CHECK(hermitian_residual(f) == 0.0);
      for (std::size_t idx : lat.retained_indices()) {
        if (norm(f[idx]) == 0.0) continue;
        const double kn = norm(lat.wavevector(idx));
        CHECK(kn >= 1.0);
        CHECK(kn <= 2.0);
      }
    }
  }
}

TEST_CASE("steady forcing is time independent") {
  const Lattice lat = Lattice::cube(8);
  const ForcingModel m(lat, shell_spec(ForcingKind::Steady, 9), 0.1);
  const SpectralField f0 = m.sample(0.0);
  for (double t : {0.1, 3.0, 100.0}) CHECK(identical(m.sample(t), f0));
  for (std::size_t idx : lat.retained_indices())
    if (norm(f0[idx]) > 0.0) CHECK(norm(f0[idx]) == Approx(0.4).epsilon(1e-14));
}

TEST_CASE("stochastic forcing is reproducible from its seed") {
  const Lattice lat = Lattice::cube(8);
  const ForcingModel a(lat, shell_spec(ForcingKind::Stochastic, 42), 0.1);
  const ForcingModel b(lat, shell_spec(ForcingKind::Stochastic, 42), 0.1);
  const ForcingModel c(lat, shell_spec(ForcingKind::Stochastic, 43), 0.1);
  // Different query orders must give the same function of t.
  const SpectralField late = a.sample(2.345);
  const SpectralField early = a.sample(0.5);
  CHECK(identical(b.sample(0.5), early));
  CHECK(identical(b.sample(2.345), late));
  CHECK(identical(a.sample(2.345), late));
  CHECK_FALSE(identical(c.sample(0.5), early));
  // Grid values are interpolated linearly in between.
  const SpectralField g0 = a.sample(0.20), g1 = a.sample(0.21), mid = a.sample(0.205);
  for (std::size_t i = 0; i < mid.size(); ++i)
    CHECK(norm(mid[i] - (0.5 * g0[i] + 0.5 * g1[i])) <= 1e-13);
}

TEST_CASE("force statistics of a steady shell") {
  const Lattice lat = Lattice::cube(8);
  ForcingSpec spec = shell_spec(ForcingKind::Steady, 1);
  spec.k_hi = 1.0; // the six modes with |k| = 1
  const ForcingModel m(lat, spec, 0.1);
  ForceStats st(lat);
  const double dt = 0.05;
  st.start(m.sample(0.0));
  for (int n = 1; n <= 40; ++n) st.update(m.sample(n * dt), dt);
  const double T = st.time();
  CHECK(T == Approx(2.0).epsilon(1e-14));
  const std::size_t k0 = lat.index_of({0, 0, 1});
  CHECK(st.F1(k0) == Approx(0.4 * std::sqrt(T)).epsilon(1e-13));
  CHECK(st.F_inf() == Approx(0.4 * std::sqrt(T)).epsilon(1e-13));
  // F^2 = sum F1^2/|k|^2 over the six unit modes.
  CHECK(st.F2() == Approx(6.0 * 0.16 * T).epsilon(1e-13));
  CHECK(st.sup_force_over_k() == Approx(0.4).epsilon(1e-14));
  const double hm1 = std::sqrt(hminus1_norm2(m.sample(0.0)));
  CHECK(st.sup_hminus1() == Approx(hm1).epsilon(1e-14));
  CHECK(hm1 == Approx(std::sqrt(6.0 * 0.16)).epsilon(1e-14));
}

TEST_CASE("force statistics are monotone and bounded") {
  const Lattice lat = Lattice::cube(8);
  for (auto kind : {ForcingKind::Periodic, ForcingKind::Stochastic}) {
    const ForcingModel m(lat, shell_spec(kind, 5), 0.1);
    ForceStats st(lat);
    st.start(m.sample(0.0));
    double c = 0.0; // sup |f^| seen so far
    std::vector<double> prev(lat.size(), 0.0);
    double prev_inf = 0.0, prev_f2 = 0.0;
    const double dt = 0.01;
    for (int n = 1; n <= 300; ++n) {
      const SpectralField f = m.sample(n * dt);
      for (const auto &z : f.data()) c = std::max(c, norm(z));
      st.update(f, dt);
      for (std::size_t idx : lat.retained_indices()) {
        CHECK(st.F1(idx) >= prev[idx]);
        CHECK(st.F1(idx) <= st.F_inf());
        prev[idx] = st.F1(idx);
      }
      CHECK(st.F_inf() >= prev_inf);
      CHECK(st.F2() >= prev_f2);
      prev_inf = st.F_inf();
      prev_f2 = st.F2();
    }
    if (kind == ForcingKind::Periodic)
      CHECK(st.F_inf() <= 0.4 * std::sqrt(st.time()) * (1 + 1e-12));
    else
      CHECK(st.F_inf() <= c * std::sqrt(st.time()) * (1 + 1e-12));
  }
  ForceStats st(lat);
  CHECK_THROWS_AS(st.update(SpectralField(lat), 0.1), Error);
  st.start(SpectralField(lat));
  CHECK_THROWS_AS(st.update(SpectralField(lat), 0.0), Error);
}

TEST_CASE("stationary stochastic forcing accumulates linearly") {
  const Lattice lat = Lattice::cube(8);
  ForcingSpec spec = shell_spec(ForcingKind::Stochastic, 77);
  spec.correlation_time = 0.05;
  spec.sample_interval = 0.01;
  const ForcingModel m(lat, spec, 0.1);
  ForceStats st(lat);
  const double dt = 0.01, T = 200.0;
  const int steps = static_cast<int>(T / dt);
  std::vector<double> ts, ss;
  st.start(m.sample(0.0));
  for (int n = 1; n <= steps; ++n) {
    st.update(m.sample(n * dt), dt);
    if (n % 100 == 0) {
      double s = 0.0;
      for (std::size_t idx : lat.retained_indices()) s += st.F1(idx) * st.F1(idx);
      ts.push_back(st.time());
      ss.push_back(s);
    }
  }
  auto slope = [&](std::size_t lo, std::size_t hi) {
    double mt = 0, ms = 0;
    for (std::size_t i = lo; i < hi; ++i) mt += ts[i], ms += ss[i];
    mt /= double(hi - lo);
    ms /= double(hi - lo);
    double num = 0, den = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      num += (ts[i] - mt) * (ss[i] - ms);
      den += (ts[i] - mt) * (ts[i] - mt);
    }
    return num / den;
  };
  const std::size_t n = ts.size();
  const double s3 = slope(n / 2, 3 * n / 4);
  const double s4 = slope(3 * n / 4, n);
  CHECK(std::abs(s3 - s4) <= 0.1 * std::abs(s4));
  // Stationary variance: E|f^(k)|^2 = amplitude^2 on every shell mode, so the
  // slope approaches amplitude^2 times the number of shell modes.
  std::size_t shell = 0;
  for (std::size_t idx : lat.retained_indices()) {
    const double kn = norm(lat.wavevector(idx));
    if (kn >= 1.0 && kn <= 2.0) ++shell;
  }
  CHECK(s4 == Approx(0.16 * shell).epsilon(0.1));
}

TEST_CASE("bound enforcement caps |f^| by nu |k| R1") {
  const Lattice lat = Lattice::cube(8);
  ForcingSpec spec = shell_spec(ForcingKind::Stochastic, 2);
  spec.amplitude = 5.0;
  spec.enforce_bound = true;
  spec.bound_R1 = 1.5;
  const double nu = 0.1;
  const ForcingModel m(lat, spec, nu);
  for (double t : {0.0, 0.37, 1.2}) {
    const SpectralField f = m.sample(t);
    for (std::size_t idx : lat.retained_indices())
      CHECK(norm(f[idx]) <= nu * norm(lat.wavevector(idx)) * 1.5 * (1 + 1e-14));
    CHECK(divergence_residual(f) <= divergence_tolerance);
  }
  spec.bound_R1 = 0.0;
  CHECK_THROWS_AS(ForcingModel(lat, spec, nu), ConfigError);
}

TEST_CASE("forcing configuration is validated") {
  const Lattice lat = Lattice::cube(8);
  ForcingSpec s = shell_spec(ForcingKind::Steady, 0);
  s.k_lo = 3.0;
  s.k_hi = 2.0;
  CHECK_THROWS_AS(ForcingModel(lat, s, 0.1), ConfigError);
  s = shell_spec(ForcingKind::Stochastic, 0);
  s.correlation_time = 0.0;
  CHECK_THROWS_AS(ForcingModel(lat, s, 0.1), ConfigError);
  CHECK(forcing_kind_from_string("periodic") == ForcingKind::Periodic);
  CHECK_THROWS_AS(forcing_kind_from_string("white"), ConfigError);
}
