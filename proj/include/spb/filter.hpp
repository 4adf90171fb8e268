#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "spb/bounds.hpp"

namespace spb {

inline constexpr double p_infinity = std::numeric_limits<double>::infinity();

// C^2 smoothstep 6x^5 - 15x^4 + 10x^3 on [0, 1].
inline double smoothstep2(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
}

// Smooth cube cutoff around k: 1 on |xi_i - k_i| <= delta/2, 0 outside
// |xi_i - k_i| < delta, tensor product of C^2 ramps in between.
class CubeCutoff {
public:
  CubeCutoff(const Lattice &lat, const Vec3 &center, double delta)
      : center_(center), delta_(delta), kmag_(norm(center)) {
    if (!(delta_ > 0.0) || !(delta_ < kmag_ / (2.0 * std::sqrt(3.0))))
      throw ConfigError("cube cutoff needs 0 < delta < |k|/(2 sqrt 3)");
    for (std::size_t idx : lat.retained_indices()) {
      const double w = weight(lat.wavevector(idx));
      if (w > 0.0) support_.push_back({idx, w});
    }
    cell_ = lat.dual_cell_volume();
  }

  double weight(const Vec3 &xi) const {
    double w = 1.0;
    for (int i = 0; i < 3; ++i) {
      const double s = std::abs(xi[i] - center_[i]) / delta_;
      w *= smoothstep2(2.0 * (1.0 - s));
    }
    return w;
  }

  const Vec3 &center() const { return center_; }
  double delta() const { return delta_; }
  double kmag() const { return kmag_; }
  double cell_volume() const { return cell_; }

  struct Entry {
    std::size_t idx;
    double chi;
  };
  const std::vector<Entry> &support() const { return support_; }

private:
  Vec3 center_;
  double delta_;
  double kmag_;
  double cell_ = 0.0;
  std::vector<Entry> support_;
};

namespace detail {

// (sum x_i^p |Gamma'|)^{1/p}, scaled by the max to keep large p finite.
inline double lp_norm(const std::vector<double> &x, double p, double cell) {
  double m = 0.0;
  for (double v : x) m = std::max(m, v);
  if (m == 0.0) return 0.0;
  if (std::isinf(p)) return m;
  AccurateSum s;
  for (double v : x) s.add(std::pow(v / m, p));
  return m * std::pow(s.value() * cell, 1.0 / p);
}

} // namespace detail

// e_p(k) = (sum_xi |chi_k(xi) u^(xi)|^p |Gamma'|)^{1/p}; p = inf gives the max.
inline double e_p(const SpectralField &u, const CubeCutoff &c, double p) {
  if (!(p >= 1.0)) throw ConfigError("e_p needs p >= 1");
  std::vector<double> x;
  x.reserve(c.support().size());
  for (const auto &e : c.support()) x.push_back(e.chi * norm(u[e.idx]));
  return detail::lp_norm(x, p, c.cell_volume());
}

inline double e_inf(const SpectralField &u, const CubeCutoff &c) {
  return e_p(u, c, p_infinity);
}

// Instantaneous (sum |chi_k f^|^p / |xi|^p |Gamma'|)^{1/p}.
inline double force_p(const SpectralField &f, const CubeCutoff &c, double p) {
  if (!(p >= 1.0)) throw ConfigError("f_p needs p >= 1");
  const auto &lat = f.lattice();
  std::vector<double> x;
  x.reserve(c.support().size());
  for (const auto &e : c.support())
    x.push_back(e.chi * norm(f[e.idx]) / norm(lat.wavevector(e.idx)));
  return detail::lp_norm(x, p, c.cell_volume());
}

// f_p(k, t) = sup_{s <= t} force_p(f(s)): feed samples in time order.
class FilteredForce {
public:
  FilteredForce(const CubeCutoff &c, std::vector<double> ps) : cut_(c), ps_(std::move(ps)), sup_(ps_.size(), 0.0) {}

  void observe(const SpectralField &f) {
    for (std::size_t i = 0; i < ps_.size(); ++i)
      sup_[i] = std::max(sup_[i], force_p(f, cut_, ps_[i]));
  }
  const std::vector<double> &exponents() const { return ps_; }
  double value(std::size_t i) const { return sup_[i]; }

private:
  CubeCutoff cut_;
  std::vector<double> ps_;
  std::vector<double> sup_;
};

// (2 delta)^{3/p} R^2/sqrt V + f_p < (nu/6) R1. Relative margin against the
// right-hand side (positive means the hypothesis holds).
inline double filter_hypothesis_margin(double R, double fp, double nu, double V,
                                      double delta, double p, double R1) {
  const double vol = std::isinf(p) ? 1.0 : std::pow(2.0 * delta, 3.0 / p);
  const double lhs = vol * R * R / std::sqrt(V) + fp;
  const double rhs = nu / 6.0 * R1;
  return (rhs - lhs) / rhs;
}

inline Verdict check_filter_hypothesis(const std::vector<double> &R,
                                      const std::vector<double> &fp, double nu,
                                      double V, double delta, double p,
                                      const std::vector<double> &R1) {
  if (R.size() != fp.size() || R.size() != R1.size())
    throw ConfigError("hypothesis series lengths differ");
  Verdict v;
  v.name = "filtered hypothesis";
  for (std::size_t i = 0; i < R.size(); ++i)
    v.margins.push_back(filter_hypothesis_margin(R[i], fp[i], nu, V, delta, p, R1[i]));
  for (double m : v.margins) v.margin = std::min(v.margin, m);
  v.status = v.margin > 0.0 ? Status::Pass : Status::Fail;
  return v;
}

// e_p(k, t) <= R1(t)/|k| at every checkpoint, given the hypothesis and
// e_p(k, 0) < R1(0)/|k|.
inline Verdict check_filtered_conclusion(const std::vector<double> &ep,
                                         double kmag, const std::vector<double> &R1,
                                         bool hypothesis_holds) {
  if (ep.size() != R1.size()) throw ConfigError("e_p and R1 series lengths differ");
  Verdict v;
  v.name = "filtered amplitude bound";
  for (std::size_t i = 0; i < ep.size(); ++i) {
    v.margins.push_back(detail::rel_margin(ep[i], R1[i] / kmag));
    v.slack = std::min(v.slack, R1[i] / kmag - ep[i]);
  }
  if (!hypothesis_holds || (!ep.empty() && !(ep.front() < R1.front() / kmag))) {
    v.status = Status::HypothesesUnmet;
    v.note = "filtered hypothesis or initial condition fails";
  }
  detail::finish(v);
  return v;
}

// int_0^T max_xi |chi_k u^|^2 dt (trapezoidal over checkpoints) against
// R2^2/(nu |k|^4), R2 from the continuum constant.
inline Verdict check_filtered_time_integral(const std::vector<double> &times,
                                            const std::vector<double> &einf,
                                            double kmag, double R2, double nu) {
  if (times.size() != einf.size() || times.size() < 2)
    throw ConfigError("time integral needs matching series of length >= 2");
  AccurateSum s;
  for (std::size_t i = 1; i < times.size(); ++i)
    s.add(0.5 * (times[i] - times[i - 1]) * (einf[i - 1] * einf[i - 1] + einf[i] * einf[i]));
  const double bound = R2 * R2 / (nu * std::pow(kmag, 4));
  Verdict v;
  v.name = "filtered time integral";
  v.margins = {detail::rel_margin(s.value(), bound)};
  v.slack = bound - s.value();
  detail::finish(v);
  return v;
}

} // namespace spb
