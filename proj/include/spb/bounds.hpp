#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "spb/spectra.hpp"

namespace spb {

inline constexpr double verdict_tolerance = 1e-9;

enum class Status { Pass, Fail, HypothesesUnmet };

inline std::string to_string(Status s) {
  switch (s) {
  case Status::Pass: return "PASS";
  case Status::Fail: return "FAIL";
  case Status::HypothesesUnmet: return "hypotheses unmet";
  }
  return "FAIL";
}

// Outcome of one inequality check. margin is the worst relative slack
// (bound - value)/bound; negative means violated.
struct Verdict {
  std::string name;
  Status status = Status::Pass;
  double margin = std::numeric_limits<double>::infinity();
  double slack = std::numeric_limits<double>::infinity(); // min (bound - value)
  std::string note;
  std::vector<double> margins; // per checkpoint or per bin

  bool passed() const { return status == Status::Pass; }
};

namespace detail {

inline void require_positive(double v, const char *what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(std::string(what) + " must be positive and finite");
}

// value <= bound (1 + tol); relative margin, +inf when bound is infinite.
inline double rel_margin(double value, double bound) {
  if (std::isinf(bound)) return std::numeric_limits<double>::infinity();
  if (bound == 0.0) return value <= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return (bound - value) / bound;
}

inline void finish(Verdict &v) {
  for (double m : v.margins) v.margin = std::min(v.margin, m);
  if (v.status == Status::HypothesesUnmet) return;
  v.status = v.margin >= -verdict_tolerance ? Status::Pass : Status::Fail;
}

} // namespace detail

// R1 = R^2/(nu sqrt V): equality in R^2/sqrt(V) <= nu R1.
inline double min_R1(double R, double nu, double V) {
  detail::require_positive(nu, "viscosity");
  detail::require_positive(V, "volume");
  return R * R / (nu * std::sqrt(V));
}

// R1(t) = running max of (R(t)^2/sqrt V + sup_k |f^(k,t)|/|k|)/nu.
inline std::vector<double> min_R1_forced(const std::vector<double> &R,
                                         const std::vector<double> &force_over_k,
                                         double nu, double V) {
  if (R.size() != force_over_k.size())
    throw ConfigError("R(t) and force profile lengths differ");
  detail::require_positive(nu, "viscosity");
  detail::require_positive(V, "volume");
  std::vector<double> out(R.size());
  double run = 0.0;
  for (std::size_t i = 0; i < R.size(); ++i) {
    run = std::max(run, (R[i] * R[i] / std::sqrt(V) + force_over_k[i]) / nu);
    out[i] = run;
  }
  return out;
}

// R(T) = sqrt(R0^2 + F^2(T)/nu)
inline double R_of_T(double R0, double nu, double F2) {
  detail::require_positive(nu, "viscosity");
  return std::sqrt(R0 * R0 + F2 / nu);
}

// R2 = (R4 + sqrt(2 R1(0)^2 + R4^2))/2 with R4 = R^2/(nu sqrt V) + F/sqrt(nu).
// The continuum variant doubles both terms of R4 and uses 4 R1(0)^2.
inline double R2_of_T(double R1_0, double R_T, double nu, double V, double F,
                      bool continuum = false) {
  detail::require_positive(nu, "viscosity");
  detail::require_positive(V, "volume");
  const double c = continuum ? 2.0 : 1.0;
  const double R4 = c * (R_T * R_T / (nu * std::sqrt(V)) + F / std::sqrt(nu));
  const double q = continuum ? 4.0 : 2.0;
  return 0.5 * (R4 + std::sqrt(q * R1_0 * R1_0 + R4 * R4));
}

inline double R4_of_T(double R_T, double nu, double V, double F) {
  return R_T * R_T / (nu * std::sqrt(V)) + F / std::sqrt(nu);
}

// kbar1 = C0^{3/5} eps^{2/5} / (4 pi R1^2)^{3/5}
inline double kappa1_bar(double C0, double eps, double R1) {
  detail::require_positive(C0, "C0");
  detail::require_positive(eps, "epsilon");
  detail::require_positive(R1, "R1");
  return std::pow(C0, 0.6) * std::pow(eps, 0.4) / std::pow(four_pi * R1 * R1, 0.6);
}

// kbar2 = (4 pi/(C0 nu))^3 eps^{-2} R2^6 / T^3
inline double kappa2_bar(double C0, double nu, double eps, double R2, double T) {
  detail::require_positive(C0, "C0");
  detail::require_positive(nu, "viscosity");
  detail::require_positive(eps, "epsilon");
  detail::require_positive(R2, "R2");
  detail::require_positive(T, "T");
  const double g = four_pi / (C0 * nu) * R2 * R2 / T;
  return g * g * g / (eps * eps);
}

// T0 = (4 pi)^{6/5} R1^{2/5} R2^2 / (eps^{4/5} C0^{6/5} nu), the T with
// kbar2(T) = kbar1.
inline double T0(double C0, double nu, double eps, double R1, double R2) {
  detail::require_positive(C0, "C0");
  detail::require_positive(nu, "viscosity");
  detail::require_positive(eps, "epsilon");
  detail::require_positive(R1, "R1");
  detail::require_positive(R2, "R2");
  return std::pow(four_pi, 1.2) * std::pow(R1, 0.4) * R2 * R2 /
         (std::pow(eps, 0.8) * std::pow(C0, 1.2) * nu);
}

// Largest eps for which the graph of E_K meets the admissible set:
// eps_max = [4 pi (R2/sqrt T)^{5/3} R1^{1/3} / (nu^{5/6} C0)]^{3/2}
inline double epsilon_max(double C0, double nu, double R1, double R2, double T) {
  detail::require_positive(C0, "C0");
  detail::require_positive(nu, "viscosity");
  detail::require_positive(R1, "R1");
  detail::require_positive(R2, "R2");
  detail::require_positive(T, "T");
  const double inner = four_pi * std::pow(R2 / std::sqrt(T), 5.0 / 3.0) *
                       std::cbrt(R1) / (std::pow(nu, 5.0 / 6.0) * C0);
  return std::pow(inner, 1.5);
}

inline double r_nu(double kbar1, double kbar2) { return kbar2 / kbar1; }

// Closed form (4 pi/C0)^{18/5} (R1^{2/5} R2^2 / T)^3 / (eps^{12/5} nu^3).
inline double r_nu(double C0, double nu, double eps, double R1, double R2, double T) {
  const double g = std::pow(R1, 0.4) * R2 * R2 / T;
  return std::pow(four_pi / C0, 3.6) * g * g * g / (std::pow(eps, 2.4) * nu * nu * nu);
}

struct KolmogorovScales {
  double eta = 0.0;          // (nu^3/eps)^{1/4}
  double kappa_nu = 0.0;     // 2 pi / eta
  double kappa_lambda = 0.0; // 2 pi (eps V/(nu R^2))^{1/2}
  double u_nu = 0.0;         // (eps nu)^{1/4}
  double tau_nu = 0.0;       // (nu/eps)^{1/2}
};

inline KolmogorovScales kolmogorov_scales(double nu, double eps, double V, double R) {
  detail::require_positive(nu, "viscosity");
  detail::require_positive(eps, "epsilon");
  detail::require_positive(V, "volume");
  detail::require_positive(R, "R");
  KolmogorovScales s;
  s.eta = std::pow(nu * nu * nu / eps, 0.25);
  s.kappa_nu = two_pi / s.eta;
  s.kappa_lambda = two_pi * std::sqrt(eps * V / (nu * R * R));
  s.u_nu = std::pow(eps * nu, 0.25);
  s.tau_nu = std::sqrt(nu / eps);
  return s;
}

// nu^{-1/16} (4 pi/C0)^{3/8} ((R2/sqrt T)^5 R1)^{1/8}
inline double u_nu_bound(double C0, double nu, double R1, double R2, double T) {
  return std::pow(nu, -1.0 / 16.0) * std::pow(four_pi / C0, 0.375) *
         std::pow(std::pow(R2 / std::sqrt(T), 5.0) * R1, 0.125);
}

// Comparisons of the dissipation scales with the inertial-range bounds.
inline std::vector<Verdict> scale_verdicts(const KolmogorovScales &s, double kbar2,
                                           double R, double R1, double u_bound) {
  std::vector<Verdict> out;
  auto le = [&](const char *name, double value, double bound) {
    Verdict v;
    v.name = name;
    v.margins = {detail::rel_margin(value, bound)};
    v.slack = bound - value;
    detail::finish(v);
    out.push_back(v);
  };
  le("kappa_nu <= kappa2_bar", s.kappa_nu, kbar2);
  le("kappa_lambda <= kappa2_bar", s.kappa_lambda, kbar2);
  // kappa_lambda >= R/(2 pi R1) kappa_nu^2, written as value <= bound.
  le("kappa_lambda >= R kappa_nu^2/(2 pi R1)", R / (two_pi * R1) * s.kappa_nu * s.kappa_nu,
     s.kappa_lambda);
  le("u_nu <= velocity bound", s.u_nu, u_bound);
  return out;
}

// m(t) <= R1(t) at every checkpoint, gated on the hypotheses.
inline Verdict check_invariant_A(const std::vector<double> &m,
                                 const std::vector<double> &R1, bool hypotheses_hold,
                                 const std::string &hypothesis_note = {}) {
  if (m.size() != R1.size()) throw ConfigError("m(t) and R1(t) lengths differ");
  Verdict v;
  v.name = "trapping set A_R1";
  for (std::size_t i = 0; i < m.size(); ++i) {
    v.margins.push_back(detail::rel_margin(m[i], R1[i]));
    v.slack = std::min(v.slack, R1[i] - m[i]);
  }
  if (!hypotheses_hold || (!m.empty() && m.front() > R1.front())) {
    v.status = Status::HypothesesUnmet;
    v.note = hypothesis_note.empty() ? "m(0) > R1(0) or R, R1 inadmissible" : hypothesis_note;
  }
  detail::finish(v);
  return v;
}

// E(kappa, t) <= 4 pi R1(t)^2 for every bin and checkpoint.
inline Verdict check_pointwise_spectrum(const std::vector<EnergySpectrum> &series,
                          const std::vector<double> &R1, bool hypotheses_hold = true) {
  if (series.size() != R1.size()) throw ConfigError("spectra and R1(t) lengths differ");
  Verdict v;
  v.name = "pointwise spectrum bound";
  for (std::size_t n = 0; n < series.size(); ++n) {
    const double bound = four_pi * R1[n] * R1[n];
    double worst = std::numeric_limits<double>::infinity();
    for (double e : series[n].values) {
      worst = std::min(worst, detail::rel_margin(e, bound));
      v.slack = std::min(v.slack, bound - e);
    }
    v.margins.push_back(worst);
  }
  if (!hypotheses_hold) v.status = Status::HypothesesUnmet;
  detail::finish(v);
  return v;
}

// (1/T) int_0^T E(kappa, t) dt <= 4 pi R2^2/(nu T kappa^2), kappa = j a the
// annulus argument; bin 0 (kappa = 0) is unconstrained.
inline Verdict check_averaged_spectrum(const EnergySpectrum &avg, double R2, double nu, double T,
                          bool hypotheses_hold = true) {
  detail::require_positive(nu, "viscosity");
  detail::require_positive(T, "T");
  Verdict v;
  v.name = "time-averaged spectrum bound";
  v.margins.push_back(std::numeric_limits<double>::infinity());
  for (std::size_t j = 1; j < avg.size(); ++j) {
    const double kappa = avg.lower_edge(j);
    const double bound = four_pi * R2 * R2 / (nu * T * kappa * kappa);
    v.margins.push_back(detail::rel_margin(avg.values[j], bound));
    v.slack = std::min(v.slack, bound - avg.values[j]);
  }
  if (!hypotheses_hold) v.status = Status::HypothesesUnmet;
  detail::finish(v);
  return v;
}

} // namespace spb
