#include "catch_amalgamated.hpp"

#include <sstream>

#include "spb/snapshot.hpp"
#include "spb/transform.hpp"

using namespace spb;
using Catch::Approx;

namespace {

Lattice odd_box() { return Lattice({1.0, 2.0, 3.0}, {8, 8, 8}); }

// Direct evaluation of u(x) = V^{-1/2} sum_k u^(k) e^{ik.x} at one grid point.
Vec3 direct_sample(const SpectralField &f, const Vec3 &x) {
  const auto &lat = f.lattice();
  const double s = 1.0 / std::sqrt(lat.volume());
  Vec3 out{};
  for (std::size_t idx : lat.retained_indices()) {
    const Vec3 k = lat.wavevector(idx);
    const cplx e = std::exp(cplx(0.0, dot(k, x)));
    for (int c = 0; c < 3; ++c) out[c] += s * std::real(f[idx][c] * e);
  }
  return out;
}

Vec3 grid_point(const Lattice &lat, std::size_t flat) {
  const auto &n = lat.modes();
  const auto &L = lat.lengths();
  const std::size_t i3 = flat % n[2];
  const std::size_t i2 = (flat / n[2]) % n[1];
  const std::size_t i1 = flat / (static_cast<std::size_t>(n[1]) * n[2]);
  return {L[0] * i1 / n[0], L[1] * i2 / n[1], L[2] * i3 / n[2]};
}

} // namespace

TEST_CASE("leray projection on worked examples") {
  auto close = [](const CVec3 &a, const CVec3 &b) {
    return norm(a - b) <= 1e-15;
  };
  CHECK(close(leray_project({1, 0, 0}, {1.0, 0.0, 0.0}), {0.0, 0.0, 0.0}));
  CHECK(close(leray_project({1, 0, 0}, {0.0, 1.0, 0.0}), {0.0, 1.0, 0.0}));
  CHECK(close(leray_project({1, 1, 0}, {1.0, 0.0, 0.0}), {0.5, -0.5, 0.0}));
  CHECK_THROWS_AS(leray_project({0, 0, 0}, {1.0, 0.0, 0.0}), GaugeError);
}

TEST_CASE("leray projection is idempotent and orthogonal to k") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uk(-10.0, 10.0);
  double worst_idem = 0.0, worst_orth = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 k{uk(rng), uk(rng), uk(rng)};
    const CVec3 z = random_complex_vector(rng);
    const CVec3 p = leray_project(k, z);
    worst_idem = std::max(worst_idem, norm(leray_project(k, p) - p));
    worst_orth = std::max(worst_orth, std::abs(dot(k, p)) / norm(k));
  }
  CHECK(worst_idem <= 1e-14);
  CHECK(worst_orth <= 1e-14);
}

TEST_CASE("lattice geometry") {
  const Lattice lat({1.5, 2.0, 7.0}, {8, 12, 16});
  CHECK(lat.volume() == 1.5 * 2.0 * 7.0);
  const double product = lat.dual_cell_volume() * lat.volume();
  const double target = two_pi * two_pi * two_pi;
  CHECK(std::abs(product - target) <= 4 * std::numeric_limits<double>::epsilon() * target);

  for (std::size_t idx : lat.retained_indices()) {
    REQUIRE(lat.retained(lat.negate(idx)));
    const auto n = lat.mode_numbers(idx);
    for (int i = 0; i < 3; ++i) CHECK(3 * std::abs(n[i]) < lat.modes()[i]);
    CHECK(norm(lat.wavevector(idx)) < lat.cutoff_wavenumber());
  }
  CHECK_THROWS_AS(Lattice({1.0, 1.0, 1.0}, {6, 5, 8}), ConfigError);
  CHECK_THROWS_AS(Lattice({1.0, -1.0, 1.0}, {8, 8, 8}), ConfigError);
  CHECK_THROWS_AS(Lattice({1.0, 1.0, 1.0}, {2, 8, 8}), ConfigError);
}

TEST_CASE("transform of the zero field") {
  const Lattice lat = odd_box();
  Transform fft(lat);
  const SpectralField z(lat);
  const PhysicalField p = fft.to_physical(z);
  for (const auto &c : p.comp)
    for (double v : c) CHECK(v == 0.0);
  const SpectralField back = fft.to_spectral(p);
  for (const auto &c : back.data()) CHECK(norm(c) == 0.0);
}

TEST_CASE("single mode transforms to the explicit plane wave") {
  const Lattice lat = odd_box();
  Transform fft(lat);
  SpectralField f(lat);
  const std::size_t idx = lat.index_of({0, -1, 1});
  REQUIRE(lat.retained(idx));
  const CVec3 c{cplx(0.3, -0.7), cplx(1.1, 0.2), cplx(-0.4, 0.9)};
  f.set_pair(idx, c);
  const PhysicalField p = fft.to_physical(f);
  const Vec3 k = lat.wavevector(idx);
  const double s = 1.0 / std::sqrt(lat.volume());
  double worst = 0.0;
  for (std::size_t j = 0; j < lat.size(); ++j) {
    const Vec3 x = grid_point(lat, j);
    const cplx e = std::exp(cplx(0.0, dot(k, x)));
    for (int m = 0; m < 3; ++m) {
      // (c/sqrt V) e^{ik.x} + complex conjugate
      const double expect = 2.0 * s * std::real(c[m] * e);
      worst = std::max(worst, std::abs(p.comp[m][j] - expect));
    }
  }
  CHECK(worst <= 1e-13);
}

TEST_CASE("spectral-physical round trip") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Lattice lat({two_pi, 3.0, 5.0}, {16, 8, 12});
    Transform fft(lat);
    const SpectralField f = random_solenoidal(lat, seed, 0.0, 1e9, 0.0, 1.0);
    const SpectralField back = fft.to_spectral(fft.to_physical(f));
    double diff = 0.0, scale = 0.0;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
      diff = std::max(diff, norm(back[idx] - f[idx]));
      scale = std::max(scale, norm(f[idx]));
    }
    CHECK(diff / scale <= 1e-13);
    CHECK(hermitian_residual(back) == 0.0);
  }
}

TEST_CASE("plancherel energy") {
  const Lattice lat = odd_box();
  CHECK(plancherel_energy(SpectralField(lat)) == 0.0);

  SpectralField pair(lat);
  pair.set_pair(lat.index_of({0, 1, 0}), CVec3{cplx(1.0, 0.0), cplx{}, cplx{}});
  const double V = lat.volume();
  const double expect = V / (two_pi * two_pi * two_pi) * 2.0 * lat.dual_cell_volume();
  CHECK(plancherel_energy(pair) == Approx(expect).epsilon(1e-15));

  // Quadrature oracle: trapezoidal sum of directly evaluated plane waves.
  const SpectralField f = random_solenoidal(lat, 11, 0.0, 1e9, 1.0, 2.5);
  double q = 0.0;
  for (std::size_t j = 0; j < lat.size(); ++j) {
    const Vec3 u = direct_sample(f, grid_point(lat, j));
    q += norm2(u);
  }
  q *= V / static_cast<double>(lat.size());
  CHECK(std::abs(plancherel_energy(f) - q) <= 1e-10 * q);

  Transform fft(lat);
  CHECK(std::abs(physical_energy(fft.to_physical(f)) - q) <= 1e-10 * q);
}

TEST_CASE("divergence residual") {
  const Lattice lat = Lattice::cube(8);
  CHECK(divergence_residual(SpectralField(lat)) == 0.0);

  SpectralField longitudinal(lat);
  const std::size_t idx = lat.index_of({1, 2, 0});
  const Vec3 k = lat.wavevector(idx);
  longitudinal.set_pair(idx, CVec3{cplx(k[0]), cplx(k[1]), cplx(k[2])});
  CHECK(divergence_residual(longitudinal) == Approx(1.0).epsilon(1e-15));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SpectralField g(lat);
    std::mt19937_64 rng(seed);
    for (std::size_t i : lat.retained_indices())
      if (lat.canonical(i)) g.set_pair(i, random_complex_vector(rng));
    const SpectralField p = project_solenoidal(g);
    CHECK(divergence_residual(p) <= divergence_tolerance);
    CHECK(hermitian_residual(p) == 0.0);
    CHECK(norm(p[0]) == 0.0);
  }
}

TEST_CASE("projection leaves solenoidal energy unchanged") {
  const Lattice lat = Lattice::cube(16);
  const SpectralField f = random_solenoidal(lat, 3, 1.0, 5.0, 0.5, 1.0);
  const double e0 = plancherel_energy(f);
  CHECK(plancherel_energy(project_solenoidal(f)) == Approx(e0).epsilon(1e-14));
}

TEST_CASE("helical modes are curl eigenvectors") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uk(-4.0, 4.0);
  for (int i = 0; i < 100; ++i) {
    const Vec3 k{uk(rng), uk(rng), uk(rng)};
    for (int sign : {-1, 1}) {
      const CVec3 h = helical_basis(k, sign);
      // i k x h
      const CVec3 curl{cplx(0, 1) * (k[1] * h[2] - k[2] * h[1]),
                       cplx(0, 1) * (k[2] * h[0] - k[0] * h[2]),
                       cplx(0, 1) * (k[0] * h[1] - k[1] * h[0])};
      CHECK(norm(curl - (sign * norm(k)) * h) <= 1e-13 * norm(k));
      CHECK(std::abs(dot(k, h)) <= 1e-14 * norm(k));
    }
  }
}

TEST_CASE("snapshot round trip is bit exact") {
  const Lattice lat({two_pi, 3.0, 1.25}, {8, 12, 8});
  SpectralField f = random_solenoidal(lat, 21, 0.0, 1e9, 0.0, 3.0);
  f.set_time(0.375);
  std::stringstream ss;
  write_snapshot(ss, f, 0.0123);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "SPB1");
  CHECK(bytes.size() == 4 + 3 * 4 + 5 * 8 + lat.size() * 3 * 16);

  std::istringstream in(bytes);
  const Snapshot s = read_snapshot(in);
  CHECK(s.nu == 0.0123);
  CHECK(s.field.time() == 0.375);
  CHECK(s.field.lattice().same_shape(lat));
  for (std::size_t i = 0; i < f.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      CHECK(std::bit_cast<std::uint64_t>(s.field[i][c].real()) ==
            std::bit_cast<std::uint64_t>(f[i][c].real()));
      CHECK(std::bit_cast<std::uint64_t>(s.field[i][c].imag()) ==
            std::bit_cast<std::uint64_t>(f[i][c].imag()));
    }

  std::stringstream again;
  write_snapshot(again, s.field, s.nu);
  CHECK(again.str() == bytes);
}

TEST_CASE("corrupt snapshots are rejected") {
  const Lattice lat = Lattice::cube(8);
  std::stringstream ss;
  write_snapshot(ss, SpectralField(lat), 0.1);
  std::string bytes = ss.str();

  std::istringstream truncated(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(read_snapshot(truncated), CorruptInput);

  bytes[0] = 'X';
  std::istringstream bad_magic(bytes);
  CHECK_THROWS_AS(read_snapshot(bad_magic), CorruptInput);

  CHECK_THROWS_AS(read_snapshot_file("/nonexistent/ckpt.spb"), CorruptInput);
}
