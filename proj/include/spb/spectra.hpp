#pragma once

#include <cmath>
#include <vector>

#include "spb/field.hpp"

namespace spb {

// E_j = (1/a) sum_{j a <= |k| < (j+1) a} |u^(k)|^2 |Gamma'|, the annulus sum
// evaluated at kappa = j a. Centers (j + 1/2) a are used for quadratures.
struct EnergySpectrum {
  double a = 0.0;
  double volume = 0.0;
  double t = 0.0;        // time stamp, or end of the averaging window
  double t_begin = 0.0;  // start of the averaging window (== t if instantaneous)
  int realizations = 1;
  bool finer_than_lattice = false; // a below the dual spacing; empty bins likely
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double lower_edge(std::size_t j) const { return static_cast<double>(j) * a; }
  double center(std::size_t j) const { return (static_cast<double>(j) + 0.5) * a; }
};

inline std::size_t spectrum_bin(double kmag, double a) {
  return static_cast<std::size_t>(std::floor(kmag / a));
}

inline EnergySpectrum energy_spectrum(const SpectralField &f, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("bin width must be positive");
  const auto &lat = f.lattice();
  double kmax = 0.0;
  for (std::size_t idx : lat.retained_indices())
    kmax = std::max(kmax, norm(lat.wavevector(idx)));
  const std::size_t nbins = spectrum_bin(kmax, a) + 1;
  std::vector<AccurateSum> sums(nbins);
  for (std::size_t idx : lat.retained_indices())
    sums[spectrum_bin(norm(lat.wavevector(idx)), a)].add(norm2(f[idx]));
  EnergySpectrum s;
  s.a = a;
  s.volume = lat.volume();
  s.t = s.t_begin = f.time();
  s.finer_than_lattice = a < lat.min_dual_spacing();
  s.values.resize(nbins);
  const double w = lat.dual_cell_volume() / a;
  for (std::size_t j = 0; j < nbins; ++j) s.values[j] = sums[j].value() * w;
  return s;
}

// Default bin width: the smallest dual-lattice spacing.
inline EnergySpectrum energy_spectrum(const SpectralField &f) {
  return energy_spectrum(f, f.lattice().min_dual_spacing());
}

// sum_j E_j a, compensated.
inline double spectrum_mass(const EnergySpectrum &s) {
  AccurateSum m;
  for (double e : s.values) m.add(e * s.a);
  return m.value();
}

// |sum_j E_j a - ||u^||^2| in units of ulp(||u^||^2).
inline double mass_identity_ulps(const EnergySpectrum &s, const SpectralField &f) {
  const double target = spectral_norm2(f);
  const double got = spectrum_mass(s);
  if (target == 0.0) return got == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  const double ulp = std::nextafter(target, std::numeric_limits<double>::infinity()) - target;
  return std::abs(got - target) / ulp;
}

inline void require_same_bins(const EnergySpectrum &x, const EnergySpectrum &y) {
  if (x.a != y.a || x.size() != y.size() || x.volume != y.volume)
    throw ResolutionMismatch("spectra have different bin structures");
}

// (1/(t_N - t_0)) int E dt by the trapezoidal rule over a time-ordered series.
inline EnergySpectrum time_average_spectrum(const std::vector<EnergySpectrum> &series) {
  if (series.size() < 2) throw Error("time average needs at least two spectra");
  EnergySpectrum out = series.front();
  std::vector<AccurateSum> acc(out.size());
  for (std::size_t n = 1; n < series.size(); ++n) {
    require_same_bins(series[0], series[n]);
    const double dt = series[n].t - series[n - 1].t;
    if (!(dt > 0.0)) throw Error("spectra series is not strictly increasing in time");
    for (std::size_t j = 0; j < out.size(); ++j)
      acc[j].add(0.5 * dt * (series[n - 1].values[j] + series[n].values[j]));
  }
  const double T = series.back().t - series.front().t;
  for (std::size_t j = 0; j < out.size(); ++j) out.values[j] = acc[j].value() / T;
  out.t_begin = series.front().t;
  out.t = series.back().t;
  return out;
}

inline EnergySpectrum ensemble_average_spectrum(const std::vector<EnergySpectrum> &members) {
  if (members.empty()) throw Error("ensemble average needs at least one spectrum");
  EnergySpectrum out = members.front();
  std::vector<AccurateSum> acc(out.size());
  int count = 0;
  for (const auto &m : members) {
    require_same_bins(out, m);
    for (std::size_t j = 0; j < out.size(); ++j) acc[j].add(m.values[j]);
    count += m.realizations;
  }
  for (std::size_t j = 0; j < out.size(); ++j)
    out.values[j] = acc[j].value() / static_cast<double>(members.size());
  out.realizations = count;
  return out;
}

struct KolmogorovModel {
  double C0 = 1.0;
  double epsilon = 1.0;

  KolmogorovModel(double c0, double eps) : C0(c0), epsilon(eps) {
    if (!(C0 > 0.0) || !(epsilon > 0.0))
      throw ConfigError("Kolmogorov model needs C0 > 0 and epsilon > 0");
  }
  // E_K(kappa) = C0 eps^{2/3} kappa^{-5/3}
  double operator()(double kappa) const {
    if (!(kappa > 0.0)) throw ConfigError("E_K needs kappa > 0");
    return C0 * std::cbrt(epsilon * epsilon) * std::pow(kappa, -5.0 / 3.0);
  }
  double prefactor() const { return C0 * std::cbrt(epsilon * epsilon); }
};

inline double kolmogorov_EK(double C0, double epsilon, double kappa) {
  return KolmogorovModel(C0, epsilon)(kappa);
}

// eps_1 = nu/(2pi)^3 int kappa^2 E dkappa, midpoint rule on bin centers.
inline double dissipation_epsilon1(const EnergySpectrum &s, double nu) {
  AccurateSum acc;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double c = s.center(j);
    acc.add(c * c * s.values[j] * s.a);
  }
  return nu / (two_pi * two_pi * two_pi) * acc.value();
}

// ||u||_{H^r}^2 = V/(2pi)^3 int (kappa^2 + 1)^r E dkappa, midpoint rule.
inline double sobolev_norm(const EnergySpectrum &s, double r) {
  AccurateSum acc;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double c = s.center(j);
    acc.add(std::pow(c * c + 1.0, r) * s.values[j] * s.a);
  }
  return s.volume / (two_pi * two_pi * two_pi) * acc.value();
}

} // namespace spb
