#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "spb/filter.hpp"
#include "spb/io/run.hpp"
#include "spb/oracle.hpp"

namespace spb {

// Every constant a bounds report is built from, per checkpoint where it varies.
struct RunConstants {
  double V = 0.0, nu = 0.0, T = 0.0, C0 = 1.0;
  bool forced = false;
  std::vector<double> times, R, R1, m, sup_force_over_k;
  double norm0 = 0.0, R0 = 0.0;
  double R_T = 0.0, F2_T = 0.0, F_inf_T = 0.0;
  double R2 = 0.0, R4 = 0.0, R5 = 0.0;
  bool hypotheses = true;
  std::string hypothesis_note;
  double eps1 = 0.0, eps_max = 0.0, eps = 0.0;
  std::string eps_source;
  std::vector<EnergySpectrum> spectra;
  EnergySpectrum average;

  double R1_0() const { return R1.front(); }
  double R1_max() const { return R1.back(); } // R1(t) is nondecreasing
};

inline double spectrum_bin_width(const RunConfig &c, const Lattice &lat) {
  return c.spectrum_a.value_or(lat.min_dual_spacing());
}

inline RunConstants run_constants(const RunRecord &run) {
  const RunConfig &c = run.config;
  const auto &cps = run.trajectory.checkpoints;
  if (cps.size() < 2) throw Error("bounds need at least two checkpoints");
  const Lattice &lat = cps.front().field.lattice();
  RunConstants k;
  k.V = lat.volume();
  k.nu = c.nu;
  k.C0 = c.bounds.C0;
  k.T = cps.back().field.time() - cps.front().field.time();
  if (!(k.T > 0.0)) throw Error("bounds need a run of positive duration");
  const ForcingModel model(lat, c.forcing, c.nu);
  k.forced = !model.is_zero();
  k.norm0 = std::sqrt(plancherel_energy(cps.front().field));
  k.R0 = c.bounds.R.value_or(k.norm0);

  // The t = 0 checkpoint is recorded before the first force sample enters the
  // statistics; fold f(0) in here.
  const double f0 = k.forced ? max_force_over_k(model.sample(cps.front().field.time())) : 0.0;
  for (const auto &cp : cps) {
    k.times.push_back(cp.field.time());
    k.m.push_back(max_scaled_amplitude(cp.field));
    k.R.push_back(R_of_T(k.R0, k.nu, cp.force.F2));
    k.sup_force_over_k.push_back(std::max(f0, cp.force.sup_force_over_k));
  }
  const double m0 = k.m.front();
  const bool in_ball = k.norm0 <= k.R0 * (1.0 + 1e-12);
  if (!k.forced) {
    const double need = min_R1(k.R0, k.nu, k.V);
    const double R1 = c.bounds.R1.value_or(std::max(m0, need));
    k.R1.assign(cps.size(), R1);
    k.hypotheses = in_ball && m0 <= R1 && need <= R1;
    if (!k.hypotheses)
      k.hypothesis_note = !in_ball   ? "||u0|| > R"
                          : m0 > R1 ? "u0 outside A_R1 (m(0) > R1)"
                                    : "R^2/sqrt(V) > nu R1";
  } else {
    // Strict inequality: the minimal admissible profile is nudged up by 1e-12.
    std::vector<double> need = min_R1_forced(k.R, k.sup_force_over_k, k.nu, k.V);
    for (double &x : need) x *= 1.0 + 1e-12;
    const double base = c.bounds.R1.value_or(std::max(m0, need.front()));
    for (double x : need) k.R1.push_back(std::max(base, x));
    k.hypotheses = in_ball && m0 <= base && need.front() <= base;
    if (!k.hypotheses)
      k.hypothesis_note = !in_ball   ? "||u0|| > R"
                          : m0 > base ? "u0 outside A_R1 (m(0) > R1(0))"
                                      : "R(0)^2/sqrt(V) + sup|f^|/|k| >= nu R1(0)";
  }
  k.R_T = k.R.back();
  k.F2_T = cps.back().force.F2;
  k.F_inf_T = cps.back().force.F_inf;
  k.R4 = R4_of_T(k.R_T, k.nu, k.V, k.F_inf_T);
  k.R2 = R2_of_T(k.R1_0(), k.R_T, k.nu, k.V, k.F_inf_T);
  k.R5 = R2_of_T(k.R1_0(), k.R_T, k.nu, k.V, k.F_inf_T, true);

  const double a = spectrum_bin_width(c, lat);
  for (const auto &cp : cps) k.spectra.push_back(energy_spectrum(cp.field, a));
  k.average = time_average_spectrum(k.spectra);
  k.eps1 = dissipation_epsilon1(k.average, k.nu);
  k.eps_max = epsilon_max(k.C0, k.nu, k.R1_max(), k.R2, k.T);
  if (c.bounds.epsilon) {
    k.eps = *c.bounds.epsilon;
    k.eps_source = "config";
  } else if (k.eps1 > 0.0) {
    k.eps = k.eps1;
    k.eps_source = "measured eps1";
  } else {
    k.eps = k.eps_max;
    k.eps_source = "eps_max";
  }
  return k;
}

// ||u(t)||^2 + nu int ||grad u||^2 <= R(t)^2 at every checkpoint.
inline Verdict check_energy_bound(const Trajectory &tr, const RunConstants &k) {
  Verdict v;
  v.name = "energy bound R(t)";
  for (std::size_t i = 0; i < tr.checkpoints.size(); ++i) {
    const auto &cp = tr.checkpoints[i];
    const double lhs = plancherel_energy(cp.field) + cp.dissipation;
    const double bound = k.R[i] * k.R[i];
    v.margins.push_back(detail::rel_margin(lhs, bound));
    v.slack = std::min(v.slack, bound - lhs);
  }
  if (k.norm0 > k.R0 * (1.0 + 1e-12)) {
    v.status = Status::HypothesesUnmet;
    v.note = "||u0|| > R";
  }
  detail::finish(v);
  return v;
}

// int_0^T |u^(k,t)|^2 dt <= R2^2/(nu |k|^4) for every mode, trapezoidal in
// time over the checkpoints.
inline Verdict check_mode_time_integrals(const Trajectory &tr, const RunConstants &k) {
  const auto &cps = tr.checkpoints;
  const Lattice &lat = cps.front().field.lattice();
  Verdict v;
  v.name = "per-mode time integral";
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t idx : lat.retained_indices()) {
    if (idx == 0 || !lat.canonical(idx)) continue;
    AccurateSum s;
    for (std::size_t n = 1; n < cps.size(); ++n)
      s.add(0.5 * (cps[n].field.time() - cps[n - 1].field.time()) *
            (norm2(cps[n - 1].field[idx]) + norm2(cps[n].field[idx])));
    const double k2 = norm2(lat.wavevector(idx));
    const double bound = k.R2 * k.R2 / (k.nu * k2 * k2);
    worst = std::min(worst, detail::rel_margin(s.value(), bound));
    v.slack = std::min(v.slack, bound - s.value());
  }
  v.margins = {worst};
  if (!k.hypotheses) {
    v.status = Status::HypothesesUnmet;
    v.note = k.hypothesis_note;
  }
  detail::finish(v);
  return v;
}

struct FilterRow {
  Vec3 k{};
  double delta = 0.0, p = 0.0, t = 0.0;
  double ep = 0.0, fp = 0.0, R1 = 0.0;
  double hypothesis_margin = 0.0, conclusion_margin = 0.0;
};

struct FilterResult {
  std::vector<FilterRow> rows;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;
};

inline std::vector<CubeCutoff> filter_cutoffs(const RunConfig &c, const Lattice &lat,
                                              std::vector<std::string> &notes) {
  std::vector<Vec3> centers = c.bounds.filter.centers;
  if (centers.empty()) {
    const double dk = lat.dual_spacing()[0];
    const double n = std::max(1.0, std::floor(0.5 * lat.cutoff_wavenumber() / dk));
    centers.push_back({n * dk, 0.0, 0.0});
  }
  std::vector<CubeCutoff> out;
  for (const Vec3 &k : centers) {
    const double delta = c.bounds.filter.delta.value_or(0.9 * norm(k) / (2.0 * std::sqrt(3.0)));
    CubeCutoff cut(lat, k, delta);
    if (cut.support().empty()) {
      notes.push_back("cutoff at k = (" + fmt(k[0]) + "," + fmt(k[1]) + "," + fmt(k[2]) +
                      ") holds no retained mode; skipped");
      continue;
    }
    out.push_back(std::move(cut));
  }
  return out;
}

// Filtered amplitudes e_p and force statistics f_p at every checkpoint, with
// the filtered hypothesis and conclusion. Unless R1 is fixed in the config,
// each (k, p) gets the smallest nondecreasing R1(t) >= the ledger R1(t) that
// satisfies the strict hypothesis.
inline FilterResult filter_diagnostics(const RunRecord &run, const RunConstants &k) {
  const RunConfig &c = run.config;
  const auto &cps = run.trajectory.checkpoints;
  const Lattice &lat = cps.front().field.lattice();
  FilterResult out;
  const std::vector<CubeCutoff> cuts = filter_cutoffs(c, lat, out.notes);
  std::vector<double> ps = c.bounds.filter.p;

  // Running sup of force_p over every force sample the solver evaluated,
  // regenerated with the solver's own time accumulation.
  std::vector<std::vector<std::vector<double>>> fp(
      cuts.size(), std::vector<std::vector<double>>(ps.size(), std::vector<double>(cps.size(), 0.0)));
  const ForcingModel model(lat, c.forcing, c.nu);
  if (!model.is_zero()) {
    std::vector<FilteredForce> ff;
    for (const auto &cut : cuts) ff.emplace_back(cut, ps);
    auto observe = [&](double t) {
      const SpectralField f = model.sample(t);
      for (auto &x : ff) x.observe(f);
    };
    auto store = [&](std::size_t i) {
      for (std::size_t a = 0; a < cuts.size(); ++a)
        for (std::size_t b = 0; b < ps.size(); ++b) fp[a][b][i] = ff[a].value(b);
    };
    double t = cps.front().field.time();
    observe(t);
    std::size_t next = 0;
    if (run.steps[0] == 0) store(next++);
    for (long step = 1; next < cps.size(); ++step) {
      observe(t + c.dt);
      observe(t + 0.5 * c.dt);
      t += c.dt;
      if (step == run.steps[next]) store(next++);
    }
  }

  const double sqrtV = std::sqrt(k.V);
  for (std::size_t a = 0; a < cuts.size(); ++a) {
    const CubeCutoff &cut = cuts[a];
    for (std::size_t b = 0; b < ps.size(); ++b) {
      const double p = ps[b];
      const double vol = std::isinf(p) ? 1.0 : std::pow(2.0 * cut.delta(), 3.0 / p);
      std::vector<double> ep, R1;
      double run_max = 0.0;
      for (std::size_t i = 0; i < cps.size(); ++i) {
        ep.push_back(std::isinf(p) ? e_inf(cps[i].field, cut) : e_p(cps[i].field, cut, p));
        double r = k.R1[i];
        if (!c.bounds.R1) {
          const double lhs = vol * k.R[i] * k.R[i] / sqrtV + fp[a][b][i];
          r = std::max(r, 6.0 / k.nu * lhs * (1.0 + 1e-9));
        }
        run_max = std::max(run_max, r);
        R1.push_back(run_max);
      }
      Verdict hyp = check_filter_hypothesis(k.R, fp[a][b], k.nu, k.V, cut.delta(), p, R1);
      Verdict con = check_filtered_conclusion(ep, cut.kmag(), R1, hyp.passed());
      const std::string tag = " k=(" + fmt(cut.center()[0]) + "," + fmt(cut.center()[1]) + "," +
                              fmt(cut.center()[2]) + ") p=" + fmt(p);
      hyp.name += tag;
      con.name += tag;
      // A failed filtered hypothesis only gates the conclusion.
      if (!hyp.passed()) hyp.status = Status::HypothesesUnmet;
      for (std::size_t i = 0; i < cps.size(); ++i)
        out.rows.push_back({cut.center(), cut.delta(), p, k.times[i], ep[i], fp[a][b][i], R1[i],
                            hyp.margins[i], con.margins[i]});
      out.verdicts.push_back(hyp);
      out.verdicts.push_back(con);
      if (std::isinf(p)) {
        const double R5 = R2_of_T(R1.front(), k.R_T, k.nu, k.V, k.F_inf_T, true);
        Verdict ti = check_filtered_time_integral(k.times, ep, cut.kmag(), R5, k.nu);
        ti.name += tag;
        out.verdicts.push_back(ti);
      }
    }
  }
  return out;
}

// ------------------------------------------------------------------------
// Reports.

struct SpectraReport {
  std::vector<EnergySpectrum> spectra;
  double max_mass_ulps = 0.0;
};

inline std::string spectrum_csv(const EnergySpectrum &s) {
  CsvWriter w("kappa,E,a,t");
  for (std::size_t j = 0; j < s.size(); ++j) w.row(s.lower_edge(j), s.values[j], s.a, s.t);
  return w.str();
}

inline std::string filter_csv(const FilterResult &fr) {
  CsvWriter w("k1,k2,k3,delta,p,t,e_p,f_p,R1,hypothesis_margin,conclusion_margin");
  for (const auto &r : fr.rows)
    w.row(r.k[0], r.k[1], r.k[2], r.delta, r.p, r.t, r.ep, r.fp, r.R1, r.hypothesis_margin,
          r.conclusion_margin);
  return w.str();
}

// Writes spectra/spectrum_NNNNNN.csv, spectra/series.json and filter.csv.
inline SpectraReport diagnose(const fs::path &dir) {
  const RunRecord run = load_trajectory(dir);
  const Lattice lat = run.config.lattice.build();
  const double a = spectrum_bin_width(run.config, lat);
  SpectraReport rep;
  json files = json::array();
  for (std::size_t i = 0; i < run.trajectory.checkpoints.size(); ++i) {
    const SpectralField &u = run.trajectory.checkpoints[i].field;
    EnergySpectrum s = energy_spectrum(u, a);
    const double ulps = mass_identity_ulps(s, u);
    rep.max_mass_ulps = std::max(rep.max_mass_ulps, ulps);
    const std::string name = indexed_name("spectrum", i, ".csv");
    write_text_atomic(dir / "spectra" / name, spectrum_csv(s));
    files.push_back({{"file", name}, {"t", s.t}, {"mass_ulps", ulps}});
    rep.spectra.push_back(std::move(s));
  }
  write_json_atomic(dir / "spectra" / "series.json",
                    {{"a", a},
                     {"finer_than_lattice", a < lat.min_dual_spacing()},
                     {"max_mass_ulps", rep.max_mass_ulps},
                     {"spectra", files}});
  if (run.trajectory.checkpoints.size() >= 2) {
    const RunConstants k = run_constants(run);
    write_text_atomic(dir / "filter.csv", filter_csv(filter_diagnostics(run, k)));
  }
  return rep;
}

struct LedgerReport {
  json doc;
  std::vector<Verdict> verdicts;       // theorem checks; FAIL sets the exit code
  std::vector<Verdict> scale_verdicts; // informational comparisons
  bool failed = false;
};

inline LedgerReport bounds_ledger(const RunRecord &run, const RunConstants &k) {
  const Trajectory &tr = run.trajectory;
  LedgerReport rep;
  rep.verdicts.push_back(check_energy_bound(tr, k));
  rep.verdicts.push_back(check_invariant_A(k.m, k.R1, k.hypotheses, k.hypothesis_note));
  rep.verdicts.push_back(check_pointwise_spectrum(k.spectra, k.R1, k.hypotheses));
  rep.verdicts.push_back(check_averaged_spectrum(k.average, k.R2, k.nu, k.T, k.hypotheses));
  rep.verdicts.push_back(check_mode_time_integrals(tr, k));
  const FilterResult fr = filter_diagnostics(run, k);
  for (const auto &v : fr.verdicts) rep.verdicts.push_back(v);
  for (auto &v : rep.verdicts)
    if (!k.hypotheses && v.status == Status::HypothesesUnmet && v.note.empty()) v.note = k.hypothesis_note;

  const double kb1 = kappa1_bar(k.C0, k.eps, k.R1_max());
  const double kb2 = kappa2_bar(k.C0, k.nu, k.eps, k.R2, k.T);
  const double R1 = k.R1_max();
  const KolmogorovScales sc = kolmogorov_scales(k.nu, k.eps, k.V, k.R_T);
  const double ub = u_nu_bound(k.C0, k.nu, R1, k.R2, k.T);
  rep.scale_verdicts = scale_verdicts(sc, kb2, k.R_T, R1, ub);
  rep.failed = std::any_of(rep.verdicts.begin(), rep.verdicts.end(),
                           [](const Verdict &v) { return v.status == Status::Fail; });

  using detail::finite_or_string;
  json verdicts = json::array(), scales = json::array();
  for (const auto &v : rep.verdicts) verdicts.push_back(verdict_json(v));
  for (const auto &v : rep.scale_verdicts) scales.push_back(verdict_json(v));
  json R = json::array(), R1s = json::array(), m = json::array();
  for (std::size_t i = 0; i < k.times.size(); ++i) {
    R.push_back({{"t", k.times[i]}, {"R", k.R[i]}});
    R1s.push_back({{"t", k.times[i]}, {"R1", k.R1[i]}});
    m.push_back({{"t", k.times[i]}, {"m", k.m[i]}});
  }
  rep.doc = {
      {"status", rep.failed ? "FAIL" : "PASS"},
      {"hypotheses", k.hypotheses ? "met" : "unmet"},
      {"hypothesis_note", k.hypothesis_note},
      {"forced", k.forced},
      {"resolution_warning", run.resolution_warning},
      {"inputs", {{"V", k.V}, {"nu", k.nu}, {"T", k.T}, {"C0", k.C0}, {"norm_u0", k.norm0}}},
      {"constants",
       {{"R", k.R0},
        {"R_T", k.R_T},
        {"F2_T", k.F2_T},
        {"F_inf_T", k.F_inf_T},
        {"R1_0", k.R1_0()},
        {"R1_max", R1},
        {"R2", k.R2},
        {"R4", k.R4},
        {"R5", k.R5},
        {"kappa1_bar", kb1},
        {"kappa2_bar", kb2},
        {"T0", k.forced ? json(nullptr) : json(T0(k.C0, k.nu, k.eps, R1, k.R2))},
        {"r_nu", r_nu(kb1, kb2)},
        {"crossing_kappa", k.R2 / (R1 * std::sqrt(k.nu * k.T))},
        {"epsilon", k.eps},
        {"epsilon_source", k.eps_source},
        {"eps1", k.eps1},
        {"eps_max", k.eps_max},
        {"eta_nu", sc.eta},
        {"kappa_nu", sc.kappa_nu},
        {"kappa_lambda", sc.kappa_lambda},
        {"u_nu", sc.u_nu},
        {"u_nu_bound", ub},
        {"tau_nu", sc.tau_nu}}},
      {"series", {{"R", R}, {"R1", R1s}, {"m", m}}},
      {"verdicts", verdicts},
      {"scale_comparisons", scales},
      {"notes", fr.notes}};
  for (auto &[key, value] : rep.doc["constants"].items())
    if (value.is_number_float()) value = finite_or_string(value.get<double>());
  return rep;
}

inline std::string margins_csv(const LedgerReport &rep, const RunConstants &k) {
  CsvWriter w("check,index,coordinate,margin");
  for (const auto &v : rep.verdicts) {
    const bool per_bin = v.name == "time-averaged spectrum bound";
    const bool per_time = v.margins.size() == k.times.size() && !per_bin;
    for (std::size_t i = 0; i < v.margins.size(); ++i) {
      const double coord = per_bin ? k.average.lower_edge(i) : per_time ? k.times[i] : k.T;
      w.row("\"" + v.name + "\"", i, coord, v.margins[i]);
    }
  }
  return w.str();
}

// Writes ledger.json and margins.csv into dir.
inline LedgerReport bounds(const fs::path &dir) {
  const RunRecord run = load_trajectory(dir);
  const RunConstants k = run_constants(run);
  LedgerReport rep = bounds_ledger(run, k);
  write_json_atomic(dir / "ledger.json", rep.doc);
  write_text_atomic(dir / "margins.csv", margins_csv(rep, k));
  return rep;
}

struct BehaviorReport {
  BehaviorVerdict verdict;
  EndpointReport endpoints;
  json doc;
};

inline BehaviorWindow default_window(const RunConfig &c, const Lattice &lat, const RunConstants &k) {
  BehaviorWindow w;
  const double a = spectrum_bin_width(c, lat);
  w.kappa1 = c.bounds.kappa1.value_or(2.0 * a);
  w.kappa2 = c.bounds.kappa2.value_or(0.5 * lat.cutoff_wavenumber());
  w.Tbar = c.bounds.Tbar.value_or(k.times.back());
  w.C1 = c.bounds.C1.value_or(c.bounds.smallness * KolmogorovModel(c.bounds.C0, k.eps).prefactor());
  w.theta = c.bounds.theta;
  return w;
}

inline BehaviorVerdict behavior_verdict(const std::string &criterion, const RunRecord &run,
                                        const std::vector<EnergySpectrum> &spectra,
                                        const KolmogorovModel &ek, const BehaviorWindow &w) {
  if (criterion == "uniform") return uniform_criterion(spectra, ek, w);
  if (criterion == "sobolev") return sobolev_criterion(spectra, ek, w);
  if (criterion == "besov") {
    std::vector<ShellSeries> shells;
    for (const auto &cp : run.trajectory.checkpoints)
      shells.push_back({cp.field.time(), besov_shell_sums(cp.field)});
    return besov_criterion(shells, ek, w);
  }
  throw ConfigError("unknown criterion '" + criterion + "' (uniform, sobolev, besov)");
}

inline json behavior_json(const BehaviorVerdict &v, const EndpointReport &e) {
  json shells = json::array(), ineq = json::array(), per = json::array();
  for (const auto &s : v.shells)
    shells.push_back({{"j", s.j}, {"t", s.t}, {"measured", s.measured}, {"target", s.target},
                      {"tolerance", s.tolerance}});
  for (const auto &q : e.inequalities)
    ineq.push_back({{"name", q.name}, {"lhs", q.lhs}, {"rhs", q.rhs}, {"holds", q.holds}});
  for (std::size_t i = 0; i < v.times.size(); ++i)
    per.push_back({{"t", v.times[i]}, {"deviation", v.deviations[i]}});
  return {{"criterion", v.criterion},
          {"window",
           {{"kappa1", v.window.kappa1},
            {"kappa2", v.window.kappa2},
            {"Tbar", v.window.Tbar},
            {"C1", v.window.C1},
            {"theta", v.window.theta}}},
          {"deviation", v.deviation},
          {"passed", v.passed},
          {"per_checkpoint", per},
          {"shells", shells},
          {"notes", v.notes},
          {"endpoints",
           {{"state", e.state},
            {"kappa1_bar", e.kappa1_bar},
            {"kappa2_bar", e.kappa2_bar},
            {"T0", detail::finite_or_string(e.T0)},
            {"inequalities", ineq},
            {"notes", e.notes}}}};
}

inline EndpointInputs endpoint_inputs(const RunConfig &c, const RunConstants &k) {
  EndpointInputs in;
  in.C0 = c.bounds.C0;
  in.epsilon = k.eps;
  in.nu = k.nu;
  in.R1 = k.R1_max();
  in.R2 = k.R2;
  in.T = k.T;
  in.unforced = !k.forced;
  in.slack = c.bounds.slack;
  in.smallness = c.bounds.smallness;
  return in;
}

// Writes behavior_<criterion>.json into dir.
inline BehaviorReport behavior(const fs::path &dir, const std::string &criterion) {
  const RunRecord run = load_trajectory(dir);
  const RunConstants k = run_constants(run);
  const Lattice lat = run.config.lattice.build();
  const BehaviorWindow w = default_window(run.config, lat, k);
  const KolmogorovModel ek(run.config.bounds.C0, k.eps);
  BehaviorReport rep;
  rep.verdict = behavior_verdict(criterion, run, k.spectra, ek, w);
  std::vector<EnergySpectrum> inside;
  for (const auto &s : k.spectra)
    if (s.t <= w.Tbar * (1.0 + 1e-12)) inside.push_back(s);
  rep.endpoints = endpoint_constraints(rep.verdict, endpoint_inputs(run.config, k), inside);
  rep.doc = behavior_json(rep.verdict, rep.endpoints);
  rep.doc["epsilon"] = k.eps;
  rep.doc["epsilon_source"] = k.eps_source;
  write_json_atomic(dir / ("behavior_" + criterion + ".json"), rep.doc);
  return rep;
}

struct EnsembleReport {
  std::vector<std::vector<EnergySpectrum>> members; // [realization][checkpoint]
  std::vector<EnergySpectrum> mean;                 // [checkpoint]
  json doc;
  bool failed = false;
};

// n realizations with seeds base + i (initial field and forcing), written to
// dir/realization_NNNNNN; ensemble.csv carries every spectrum plus the mean.
inline EnsembleReport ensemble(const RunConfig &base, int n, const fs::path &dir,
                               const std::string &criterion = "uniform") {
  if (n < 1) throw ConfigError("ensemble needs at least one realization");
  validate(base);
  EnsembleReport rep;
  std::vector<RunConstants> ks;
  json members = json::array();
  for (int i = 0; i < n; ++i) {
    RunConfig c = base;
    c.initial.seed = base.initial.seed + static_cast<std::uint64_t>(i);
    c.forcing.seed = base.forcing.seed + static_cast<std::uint64_t>(i);
    const fs::path sub = dir / indexed_name("realization", static_cast<std::size_t>(i), "");
    const RunRecord run = simulate(c, sub);
    ks.push_back(run_constants(run));
    rep.members.push_back(ks.back().spectra);
    members.push_back({{"realization", i},
                       {"dir", sub.filename().string()},
                       {"initial_seed", c.initial.seed},
                       {"forcing_seed", c.forcing.seed},
                       {"in_A_R1_and_B_R", ks.back().hypotheses},
                       {"m0", ks.back().m.front()},
                       {"norm_u0", ks.back().norm0}});
  }
  const std::size_t nc = rep.members.front().size();
  for (std::size_t t = 0; t < nc; ++t) {
    std::vector<EnergySpectrum> at;
    for (const auto &m : rep.members) at.push_back(m.at(t));
    rep.mean.push_back(ensemble_average_spectrum(at));
  }

  CsvWriter w("kappa,E,a,t,realization");
  for (int i = 0; i < n; ++i)
    for (const auto &s : rep.members[static_cast<std::size_t>(i)])
      for (std::size_t j = 0; j < s.size(); ++j) w.row(s.lower_edge(j), s.values[j], s.a, s.t, i);
  for (const auto &s : rep.mean)
    for (std::size_t j = 0; j < s.size(); ++j) w.row(s.lower_edge(j), s.values[j], s.a, s.t, "mean");
  write_text_atomic(dir / "ensemble.csv", w.str());

  // Constants valid for every member: elementwise maxima.
  RunConstants k = ks.front();
  int inside = 0;
  double eps1 = 0.0;
  for (const auto &x : ks) {
    for (std::size_t t = 0; t < nc; ++t) k.R1[t] = std::max(k.R1[t], x.R1[t]);
    k.R2 = std::max(k.R2, x.R2);
    k.forced = k.forced || x.forced;
    inside += x.hypotheses ? 1 : 0;
    eps1 += x.eps1 / n;
  }
  k.spectra = rep.mean;
  k.average = time_average_spectrum(rep.mean);
  k.eps1 = eps1;
  if (base.bounds.epsilon) {
    k.eps = *base.bounds.epsilon;
    k.eps_source = "config";
  } else if (eps1 > 0.0) {
    k.eps = eps1;
    k.eps_source = "ensemble mean eps1";
  } else {
    k.eps = epsilon_max(k.C0, k.nu, k.R1_max(), k.R2, k.T);
    k.eps_source = "eps_max";
  }
  const bool all_inside = inside == n;
  const Verdict v4 = check_pointwise_spectrum(rep.mean, k.R1, all_inside);
  const Verdict v5 = check_averaged_spectrum(k.average, k.R2, k.nu, k.T, all_inside);

  const Lattice lat = base.lattice.build();
  const BehaviorWindow win = default_window(base, lat, k);
  const KolmogorovModel ek(base.bounds.C0, k.eps);
  RunRecord dummy;
  BehaviorVerdict bv;
  if (criterion == "besov") {
    // Shell sums are linear in |u^|^2, so the ensemble shell sums are means.
    std::vector<ShellSeries> shells(nc);
    for (int i = 0; i < n; ++i) {
      const RunRecord run = load_trajectory(dir / indexed_name("realization", static_cast<std::size_t>(i), ""));
      for (std::size_t t = 0; t < nc; ++t) {
        shells[t].t = run.trajectory.checkpoints[t].field.time();
        for (const auto &[j, s] : besov_shell_sums(run.trajectory.checkpoints[t].field))
          shells[t].sums[j] += s / n;
      }
    }
    bv = besov_criterion(shells, ek, win);
  } else {
    bv = behavior_verdict(criterion, dummy, rep.mean, ek, win);
  }
  EndpointReport ep = endpoint_constraints(bv, endpoint_inputs(base, k), rep.mean);
  if (!all_inside) {
    ep.state = "not applicable";
    ep.notes.push_back("some realizations start outside A_R1 and B_R");
  }
  rep.failed = v4.status == Status::Fail || v5.status == Status::Fail || ep.contradiction();
  rep.doc = {{"realizations", n},
             {"fraction_in_A_R1_and_B_R", static_cast<double>(inside) / n},
             {"members", members},
             {"R1_max", k.R1_max()},
             {"R2", k.R2},
             {"T", k.T},
             {"epsilon", k.eps},
             {"epsilon_source", k.eps_source},
             {"verdicts", {verdict_json(v4), verdict_json(v5)}},
             {"behavior", behavior_json(bv, ep)},
             {"status", rep.failed ? "FAIL" : "PASS"}};
  write_json_atomic(dir / "ensemble_bounds.json", rep.doc);
  return rep;
}

struct OracleComparison {
  double relative = 0.0; // max |a - b| / max |b|
  double absolute = 0.0; // max |a - b|
  double scale = 0.0;    // max |k| sum |u^| max |u^| / sqrt V, bounds |N(k)|
  bool within(double tol) const { return relative <= tol || absolute <= tol * scale; }
};

// Spectral nonlinear term against the direct convolution on a snapshot. For
// fields whose nonlinear term vanishes (Beltrami) the relative difference is
// round-off over round-off, so agreement is also accepted against the a
// priori size of the convolution.
inline OracleComparison oracle_compare(const SpectralField &u) {
  const Lattice &lat = u.lattice();
  NavierStokes ns(lat, 0.0, ForcingModel::zero(lat));
  const SpectralField a = ns.nonlinear_term(u);
  const SpectralField b = brute_force_nonlinear(u);
  OracleComparison c;
  c.relative = relative_max_difference(a, b);
  double kmax = 0.0, l1 = 0.0, sup = 0.0;
  for (std::size_t idx = 0; idx < a.size(); ++idx) c.absolute = std::max(c.absolute, norm(a[idx] - b[idx]));
  for (std::size_t idx : lat.retained_indices()) {
    kmax = std::max(kmax, norm(lat.wavevector(idx)));
    l1 += norm(u[idx]);
    sup = std::max(sup, norm(u[idx]));
  }
  c.scale = kmax * l1 * sup / std::sqrt(lat.volume());
  return c;
}

inline OracleComparison oracle_compare(const fs::path &snapshot) {
  return oracle_compare(read_snapshot_file(snapshot).field);
}

} // namespace spb
