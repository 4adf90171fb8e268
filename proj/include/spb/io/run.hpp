#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spb/behavior.hpp"
#include "spb/dynamics.hpp"
#include "spb/io/report.hpp"
#include "spb/snapshot.hpp"

namespace spb {

namespace fs = std::filesystem;

inline constexpr const char *manifest_name = "manifest.json";
inline constexpr const char *timeseries_name = "timeseries.csv";

// Scales every mode with |k||u^| above R1 down onto R1 (a hair inside, so
// rounding cannot push it back out). The L2 norm can only shrink.
inline void clip_to_trapping_set(SpectralField &f, double R1) {
  const auto &lat = f.lattice();
  for (std::size_t idx : lat.retained_indices()) {
    if (idx == 0 || !lat.canonical(idx)) continue;
    const double s = norm(lat.wavevector(idx)) * norm(f[idx]);
    if (s > R1) f.set_pair(idx, (R1 / s * (1.0 - 1e-14)) * f[idx]);
  }
}

inline SpectralField initial_field(const RunConfig &c, const Lattice &lat) {
  const auto &ic = c.initial;
  SpectralField u(lat);
  switch (ic.kind) {
  case InitialKind::Abc: u = abc_flow(lat, ic.A, ic.B, ic.C); break;
  case InitialKind::Beltrami: u = beltrami_shell(lat, ic.radius, ic.sign, ic.seed, ic.l2_norm); break;
  case InitialKind::Random:
    u = random_solenoidal(lat, ic.seed, ic.k_lo, ic.k_hi, ic.slope, ic.l2_norm);
    break;
  case InitialKind::Kolmogorov:
    u = kolmogorov_field(lat, KolmogorovModel(ic.C0, ic.epsilon), ic.seed, ic.k_lo, ic.k_hi);
    break;
  case InitialKind::Snapshot: {
    Snapshot s = read_snapshot_file(ic.path, lat.dealias_rule());
    if (!s.field.lattice().same_shape(lat))
      throw ResolutionMismatch("initial snapshot " + ic.path + " does not match the configured lattice");
    u = project_solenoidal(std::move(s.field));
    u.set_time(0.0);
    break;
  }
  }
  if (ic.clip_R1) clip_to_trapping_set(u, *ic.clip_R1);
  return u;
}

// Config as embedded in run manifests: the output directory is dropped so that
// identical runs written to different places produce identical bytes.
inline json manifest_config(const RunConfig &c) {
  json j = config_to_json(c);
  j.erase("output_dir");
  return j;
}

struct RunRecord {
  RunConfig config;
  Trajectory trajectory;
  std::vector<long> steps;
  bool resolution_warning = false;
};

// Runs the solver and writes ckpt_NNNNNN.spb, manifest.json and timeseries.csv
// into dir. Checkpoints at t = 0, every cadence steps, and the last step.
inline RunRecord simulate(const RunConfig &c, const fs::path &dir) {
  validate(c);
  const Lattice lat = c.lattice.build();
  SolverOptions opts;
  opts.cfl = c.cfl;
  NavierStokes ns(lat, c.nu, ForcingModel(lat, c.forcing, c.nu), opts);
  SolverState s = ns.initial_state(initial_field(c, lat));
  fs::create_directories(dir);

  RunRecord rec;
  rec.config = c;
  rec.trajectory.nu = c.nu;
  const double e0 = s.initial_energy;
  const double a = c.spectrum_a.value_or(lat.min_dual_spacing());
  CsvWriter ts("t,energy,dissipation,work,residual,m,eps1,F2,F_inf,sup_force_over_k,sup_hminus1");
  json entries = json::array();
  auto checkpoint = [&] {
    const std::size_t i = rec.steps.size();
    rec.trajectory.record(s);
    rec.steps.push_back(s.steps);
    const Checkpoint &cp = rec.trajectory.checkpoints.back();
    const std::string file = indexed_name("ckpt", i, ".spb");
    write_snapshot_file(dir / file, s.field, c.nu);
    const ForceSummary &F = cp.force;
    ts.row(s.field.time(), 0.5 * plancherel_energy(s.field), cp.dissipation, cp.work,
           energy_residual(cp, e0), max_scaled_amplitude(s.field),
           dissipation_epsilon1(energy_spectrum(s.field, a), c.nu), F.F2, F.F_inf,
           F.sup_force_over_k, F.sup_hminus1);
    entries.push_back({{"file", file},
                       {"step", s.steps},
                       {"t", s.field.time()},
                       {"dissipation", cp.dissipation},
                       {"work", cp.work},
                       {"force",
                        {{"T", F.T},
                         {"F2", F.F2},
                         {"F_inf", F.F_inf},
                         {"sup_force_over_k", F.sup_force_over_k},
                         {"sup_hminus1", F.sup_hminus1}}}});
  };

  const long n = c.n_steps();
  checkpoint();
  for (long k = 1; k <= n; ++k) {
    ns.step(s, c.dt);
    if (k % c.cadence == 0 || k == n) checkpoint();
  }
  rec.resolution_warning = s.resolution_warning;

  write_text_atomic(dir / timeseries_name, ts.str());
  // The manifest goes last: its presence marks a complete trajectory.
  write_json_atomic(dir / manifest_name, {{"format", "spb-trajectory-1"},
                                          {"config", manifest_config(c)},
                                          {"steps", n},
                                          {"resolution_warning", s.resolution_warning},
                                          {"checkpoints", entries}});
  return rec;
}

inline RunRecord load_trajectory(const fs::path &dir) {
  const fs::path mpath = dir / manifest_name;
  if (!fs::exists(mpath))
    throw CorruptInput("trajectory " + dir.string() + " has no " + manifest_name + " (incomplete run?)");
  const json m = read_json_file(mpath);
  RunRecord rec;
  try {
    rec.config = config_from_json(m.at("config"));
    rec.resolution_warning = m.at("resolution_warning").get<bool>();
    rec.trajectory.nu = rec.config.nu;
    const Lattice lat = rec.config.lattice.build();
    for (const auto &e : m.at("checkpoints")) {
      const fs::path file = dir / e.at("file").get<std::string>();
      Snapshot snap = read_snapshot_file(file, lat.dealias_rule());
      if (!snap.field.lattice().same_shape(lat) || snap.field.time() != e.at("t").get<double>())
        throw CorruptInput("checkpoint " + file.string() + " does not match the manifest");
      const auto &f = e.at("force");
      ForceSummary F{f.at("T").get<double>(), f.at("F2").get<double>(), f.at("F_inf").get<double>(),
                     f.at("sup_force_over_k").get<double>(), f.at("sup_hminus1").get<double>()};
      rec.trajectory.checkpoints.push_back(
          {std::move(snap.field), e.at("dissipation").get<double>(), e.at("work").get<double>(), F});
      rec.steps.push_back(e.at("step").get<long>());
    }
  } catch (const json::exception &e) {
    throw CorruptInput(mpath.string() + ": " + e.what());
  }
  if (rec.trajectory.checkpoints.empty())
    throw CorruptInput(mpath.string() + " lists no checkpoints");
  return rec;
}

} // namespace spb
