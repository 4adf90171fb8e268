#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spb/spb.hpp"

using namespace spb;

namespace {

// 0: PASS or hypotheses unmet; 1: a theorem check failed; 2: error.
constexpr int exit_fail = 1;
constexpr int exit_error = 2;

void print_verdicts(const std::vector<Verdict> &vs) {
  for (const auto &v : vs)
    std::printf("  %-18s %-14s %s%s%s\n", to_string(v.status).c_str(), fmt(v.margin).c_str(),
                v.name.c_str(), v.note.empty() ? "" : "  -- ", v.note.c_str());
}

int run_simulate(const std::string &config, const std::string &out) {
  RunConfig c = load_config(config);
  if (!out.empty() && !std::getenv(output_dir_env)) c.output_dir = out;
  const RunRecord rec = simulate(c, c.output_dir);
  std::printf("wrote %zu checkpoints to %s\n", rec.trajectory.checkpoints.size(), c.output_dir.c_str());
  if (rec.resolution_warning)
    std::printf("warning: energy in the outermost retained shell exceeded 1%%\n");
  return 0;
}

int run_diagnose(const std::string &dir) {
  const SpectraReport rep = diagnose(dir);
  std::printf("wrote %zu spectra, max mass-identity error %s ulp\n", rep.spectra.size(),
              fmt(rep.max_mass_ulps).c_str());
  return 0;
}

int run_bounds(const std::string &dir) {
  const LedgerReport rep = bounds(dir);
  std::printf("ledger: %s (hypotheses %s)\n", rep.failed ? "FAIL" : "PASS",
              rep.doc["hypotheses"].get<std::string>().c_str());
  print_verdicts(rep.verdicts);
  std::printf("scale comparisons (informational):\n");
  print_verdicts(rep.scale_verdicts);
  return rep.failed ? exit_fail : 0;
}

int run_behavior(const std::string &dir, const std::string &criterion) {
  const BehaviorReport rep = behavior(dir, criterion);
  std::printf("%s criterion: %s (deviation %s, C1 %s); endpoints: %s\n", criterion.c_str(),
              rep.verdict.passed ? "behavior observed" : "behavior not observed",
              fmt(rep.verdict.deviation).c_str(), fmt(rep.verdict.window.C1).c_str(),
              rep.endpoints.state.c_str());
  for (const auto &q : rep.endpoints.inequalities)
    std::printf("  %-5s %s: %s <= %s\n", q.holds ? "ok" : "VIOL", q.name.c_str(), fmt(q.lhs).c_str(),
                fmt(q.rhs).c_str());
  return rep.endpoints.contradiction() ? exit_fail : 0;
}

int run_ensemble(const std::string &config, int n, const std::string &criterion,
                 const std::string &out) {
  RunConfig c = load_config(config);
  if (!out.empty() && !std::getenv(output_dir_env)) c.output_dir = out;
  const EnsembleReport rep = ensemble(c, n, c.output_dir, criterion);
  std::printf("ensemble of %d: %s; endpoints: %s\n", n, rep.doc["status"].get<std::string>().c_str(),
              rep.doc["behavior"]["endpoints"]["state"].get<std::string>().c_str());
  return rep.failed ? exit_fail : 0;
}

int run_oracle(const std::string &snapshot, double tol) {
  const OracleComparison c = oracle_compare(snapshot);
  std::printf("nonlinear term vs direct convolution: relative %s, absolute %s (scale %s, tolerance %s)\n",
              fmt(c.relative).c_str(), fmt(c.absolute).c_str(), fmt(c.scale).c_str(), fmt(tol).c_str());
  return c.within(tol) ? 0 : exit_fail;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Pseudo-spectral Navier-Stokes solver with spectral-bound diagnostics"};
  app.require_subcommand(1);

  std::string config, out, dir, criterion = "uniform", snapshot;
  int n = 4;
  double tol = 1e-12;

  auto *sim = app.add_subcommand("simulate", "run the solver and write a trajectory");
  sim->add_option("-c,--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("-o,--output", out, "output directory (SPB_OUTPUT_DIR takes precedence)");

  auto *dia = app.add_subcommand("diagnose", "write spectra and filter diagnostics for a trajectory");
  dia->add_option("dir", dir, "trajectory directory")->required();

  auto *bnd = app.add_subcommand("bounds", "write the bounds ledger for a trajectory");
  bnd->add_option("dir", dir, "trajectory directory")->required();

  auto *beh = app.add_subcommand("behavior", "test a trajectory for spectral behavior");
  beh->add_option("dir", dir, "trajectory directory")->required();
  beh->add_option("--criterion", criterion, "uniform | sobolev | besov")
      ->check(CLI::IsMember({"uniform", "sobolev", "besov"}));

  auto *ens = app.add_subcommand("ensemble", "run seeded realizations and average their spectra");
  ens->add_option("-c,--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  ens->add_option("-n,--seeds", n, "number of realizations")->check(CLI::PositiveNumber);
  ens->add_option("--criterion", criterion, "uniform | sobolev | besov")
      ->check(CLI::IsMember({"uniform", "sobolev", "besov"}));
  ens->add_option("-o,--output", out, "output directory (SPB_OUTPUT_DIR takes precedence)");

  auto *orc = app.add_subcommand("oracle", "check the nonlinear term on a snapshot by direct convolution");
  orc->add_option("snapshot", snapshot, "snapshot file")->required();
  orc->add_option("--tolerance", tol, "relative tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return run_simulate(config, out);
    if (*dia) return run_diagnose(dir);
    if (*bnd) return run_bounds(dir);
    if (*beh) return run_behavior(dir, criterion);
    if (*ens) return run_ensemble(config, n, criterion, out);
    if (*orc) return run_oracle(snapshot, tol);
  } catch (const CorruptInput &e) {
    std::cerr << "corrupt input: " << e.what() << '\n';
    return exit_error;
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_error;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  }
  return exit_error;
}
