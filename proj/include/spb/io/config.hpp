#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spb/forcing.hpp"

namespace spb {

using json = nlohmann::json;

struct LatticeConfig {
  std::array<double, 3> lengths{two_pi, two_pi, two_pi};
  std::array<int, 3> modes{32, 32, 32};
  DealiasRule rule = DealiasRule::TwoThirdsSphere;

  Lattice build() const { return Lattice(lengths, modes, rule); }
};

enum class InitialKind { Abc, Beltrami, Random, Kolmogorov, Snapshot };

struct InitialConfig {
  InitialKind kind = InitialKind::Abc;
  // abc
  double A = 1.0, B = 1.0, C = 1.0;
  // beltrami shell
  double radius = 1.0;
  int sign = 1;
  // random band-limited / beltrami / kolmogorov
  std::uint64_t seed = 0;
  double k_lo = 1.0, k_hi = 4.0;
  double slope = 11.0 / 6.0;
  double l2_norm = 1.0;
  // Clip |k||u^(k)| to this value after scaling (projection into A_R1).
  std::optional<double> clip_R1;
  // kolmogorov
  double C0 = 1.0, epsilon = 1.0;
  // snapshot
  std::string path;
};

struct FilterConfig {
  std::vector<Vec3> centers;  // empty: one default center on the first axis
  std::optional<double> delta; // default 0.9 |k|/(2 sqrt 3)
  std::vector<double> p{2.0, 4.0, 8.0, 16.0, 64.0, std::numeric_limits<double>::infinity()};
};

struct BoundsConfig {
  double C0 = 1.0;
  std::optional<double> epsilon; // override; else measured eps1, else eps_max
  std::optional<double> R;       // default ||u0||
  std::optional<double> R1;      // default max(m(0), minimal admissible)
  std::optional<double> C1;      // default smallness * C0 eps^{2/3}
  double slack = 2.0;
  double smallness = 0.1;
  double theta = 1.0;
  std::optional<double> kappa1, kappa2, Tbar;
  FilterConfig filter;
};

struct RunConfig {
  LatticeConfig lattice;
  double nu = 0.1;
  double dt = 0.01;
  double t_end = 1.0;
  long cadence = 10;
  double cfl = 0.5;
  InitialConfig initial;
  ForcingSpec forcing;
  std::optional<double> spectrum_a;
  BoundsConfig bounds;
  std::string output_dir = "out";

  long n_steps() const {
    return static_cast<long>(std::llround(t_end / dt));
  }
};

namespace detail {

inline json finite_or_string(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline double number_or_string(const json &j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ConfigError("expected a number, got " + j.dump());
}

template <typename T>
void read_opt(const json &j, const char *key, T &out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void read_opt(const json &j, const char *key, double &out) {
  if (j.contains(key)) out = number_or_string(j.at(key));
}

inline void read_opt(const json &j, const char *key, std::optional<double> &out) {
  if (j.contains(key) && !j.at(key).is_null()) out = number_or_string(j.at(key));
}

inline InitialKind initial_kind_from_string(const std::string &s) {
  if (s == "abc") return InitialKind::Abc;
  if (s == "beltrami") return InitialKind::Beltrami;
  if (s == "random") return InitialKind::Random;
  if (s == "kolmogorov") return InitialKind::Kolmogorov;
  if (s == "snapshot") return InitialKind::Snapshot;
  throw ConfigError("unknown initial condition '" + s + "'");
}

inline std::string to_string(InitialKind k) {
  switch (k) {
  case InitialKind::Abc: return "abc";
  case InitialKind::Beltrami: return "beltrami";
  case InitialKind::Random: return "random";
  case InitialKind::Kolmogorov: return "kolmogorov";
  case InitialKind::Snapshot: return "snapshot";
  }
  return "abc";
}

inline json opt_json(const std::optional<double> &v) {
  return v ? finite_or_string(*v) : json(nullptr);
}

} // namespace detail

inline void validate(const RunConfig &c) {
  auto positive = [](double v, const char *what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string(what) + " must be positive and finite");
  };
  positive(c.nu, "nu");
  positive(c.dt, "dt");
  if (!(c.t_end >= 0.0)) throw ConfigError("t_end must be >= 0");
  if (c.cadence <= 0) throw ConfigError("cadence must be positive");
  positive(c.cfl, "cfl");
  for (double L : c.lattice.lengths) positive(L, "lattice length");
  for (int n : c.lattice.modes)
    if (n < 4 || n % 2 != 0) throw ConfigError("lattice modes must be even and >= 4");
  if (std::abs(c.t_end / c.dt - std::round(c.t_end / c.dt)) > 1e-9 * std::max(1.0, c.t_end / c.dt))
    throw ConfigError("t_end must be an integer multiple of dt");
  if (c.spectrum_a) positive(*c.spectrum_a, "spectrum bin width");
  positive(c.bounds.C0, "C0");
  positive(c.bounds.slack, "slack");
  if (c.bounds.epsilon) positive(*c.bounds.epsilon, "epsilon");
  if (c.bounds.R) positive(*c.bounds.R, "R");
  if (c.bounds.R1) positive(*c.bounds.R1, "R1");
  if (c.bounds.C1 && !(*c.bounds.C1 >= 0.0)) throw ConfigError("C1 must be >= 0");
  if (!(c.bounds.theta > 0.0 && c.bounds.theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
  for (double p : c.bounds.filter.p)
    if (!(p >= 1.0)) throw ConfigError("filter exponents must be >= 1");
  const auto &ic = c.initial;
  if (ic.kind == InitialKind::Snapshot && !std::filesystem::exists(ic.path))
    throw ConfigError("initial snapshot '" + ic.path + "' does not exist");
  if (ic.kind == InitialKind::Random || ic.kind == InitialKind::Kolmogorov)
    if (!(ic.k_hi >= ic.k_lo)) throw ConfigError("initial band needs k_lo <= k_hi");
  if (ic.clip_R1) positive(*ic.clip_R1, "clip_R1");
}

inline RunConfig config_from_json(const json &j) {
  using detail::read_opt;
  RunConfig c;
  try {
    if (j.contains("lattice")) {
      const auto &l = j.at("lattice");
      read_opt(l, "lengths", c.lattice.lengths);
      read_opt(l, "modes", c.lattice.modes);
      if (l.contains("n")) c.lattice.modes.fill(l.at("n").get<int>());
      if (l.contains("dealias")) c.lattice.rule = dealias_rule_from_string(l.at("dealias").get<std::string>());
    }
    read_opt(j, "nu", c.nu);
    read_opt(j, "dt", c.dt);
    read_opt(j, "t_end", c.t_end);
    read_opt(j, "cadence", c.cadence);
    read_opt(j, "cfl", c.cfl);
    read_opt(j, "output_dir", c.output_dir);
    read_opt(j, "spectrum_a", c.spectrum_a);
    if (j.contains("initial")) {
      const auto &i = j.at("initial");
      auto &ic = c.initial;
      if (i.contains("kind")) ic.kind = detail::initial_kind_from_string(i.at("kind").get<std::string>());
      read_opt(i, "A", ic.A);
      read_opt(i, "B", ic.B);
      read_opt(i, "C", ic.C);
      read_opt(i, "radius", ic.radius);
      read_opt(i, "sign", ic.sign);
      read_opt(i, "seed", ic.seed);
      read_opt(i, "k_lo", ic.k_lo);
      read_opt(i, "k_hi", ic.k_hi);
      read_opt(i, "slope", ic.slope);
      read_opt(i, "l2_norm", ic.l2_norm);
      read_opt(i, "clip_R1", ic.clip_R1);
      read_opt(i, "C0", ic.C0);
      read_opt(i, "epsilon", ic.epsilon);
      read_opt(i, "path", ic.path);
    }
    if (j.contains("forcing")) {
      const auto &f = j.at("forcing");
      auto &fs = c.forcing;
      if (f.contains("kind")) fs.kind = forcing_kind_from_string(f.at("kind").get<std::string>());
      read_opt(f, "k_lo", fs.k_lo);
      read_opt(f, "k_hi", fs.k_hi);
      read_opt(f, "amplitude", fs.amplitude);
      read_opt(f, "seed", fs.seed);
      read_opt(f, "correlation_time", fs.correlation_time);
      read_opt(f, "period", fs.period);
      read_opt(f, "sample_interval", fs.sample_interval);
      read_opt(f, "enforce_bound", fs.enforce_bound);
      read_opt(f, "bound_R1", fs.bound_R1);
    }
    if (j.contains("bounds")) {
      const auto &b = j.at("bounds");
      auto &bc = c.bounds;
      read_opt(b, "C0", bc.C0);
      read_opt(b, "epsilon", bc.epsilon);
      read_opt(b, "R", bc.R);
      read_opt(b, "R1", bc.R1);
      read_opt(b, "C1", bc.C1);
      read_opt(b, "slack", bc.slack);
      read_opt(b, "smallness", bc.smallness);
      read_opt(b, "theta", bc.theta);
      read_opt(b, "kappa1", bc.kappa1);
      read_opt(b, "kappa2", bc.kappa2);
      read_opt(b, "Tbar", bc.Tbar);
      if (b.contains("filter")) {
        const auto &f = b.at("filter");
        if (f.contains("centers")) {
          bc.filter.centers.clear();
          for (const auto &k : f.at("centers")) bc.filter.centers.push_back(k.get<Vec3>());
        }
        read_opt(f, "delta", bc.filter.delta);
        if (f.contains("p")) {
          bc.filter.p.clear();
          for (const auto &p : f.at("p")) bc.filter.p.push_back(detail::number_or_string(p));
        }
      }
    }
  } catch (const json::exception &e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  validate(c);
  return c;
}

inline json config_to_json(const RunConfig &c) {
  using detail::finite_or_string;
  using detail::opt_json;
  const auto &ic = c.initial;
  const auto &fs = c.forcing;
  const auto &b = c.bounds;
  json centers = json::array();
  for (const auto &k : b.filter.centers) centers.push_back(k);
  json ps = json::array();
  for (double p : b.filter.p) ps.push_back(finite_or_string(p));
  return {
      {"lattice", {{"lengths", c.lattice.lengths}, {"modes", c.lattice.modes}, {"dealias", to_string(c.lattice.rule)}}},
      {"nu", c.nu},
      {"dt", c.dt},
      {"t_end", c.t_end},
      {"cadence", c.cadence},
      {"cfl", c.cfl},
      {"output_dir", c.output_dir},
      {"spectrum_a", opt_json(c.spectrum_a)},
      {"initial",
       {{"kind", detail::to_string(ic.kind)}, {"A", ic.A}, {"B", ic.B}, {"C", ic.C},
        {"radius", ic.radius}, {"sign", ic.sign}, {"seed", ic.seed}, {"k_lo", ic.k_lo},
        {"k_hi", finite_or_string(ic.k_hi)}, {"slope", ic.slope}, {"l2_norm", ic.l2_norm},
        {"clip_R1", opt_json(ic.clip_R1)}, {"C0", ic.C0}, {"epsilon", ic.epsilon}, {"path", ic.path}}},
      {"forcing",
       {{"kind", to_string(fs.kind)}, {"k_lo", fs.k_lo}, {"k_hi", fs.k_hi}, {"amplitude", fs.amplitude},
        {"seed", fs.seed}, {"correlation_time", fs.correlation_time}, {"period", fs.period},
        {"sample_interval", fs.sample_interval}, {"enforce_bound", fs.enforce_bound}, {"bound_R1", fs.bound_R1}}},
      {"bounds",
       {{"C0", b.C0}, {"epsilon", opt_json(b.epsilon)}, {"R", opt_json(b.R)}, {"R1", opt_json(b.R1)},
        {"C1", opt_json(b.C1)}, {"slack", b.slack}, {"smallness", b.smallness}, {"theta", b.theta},
        {"kappa1", opt_json(b.kappa1)}, {"kappa2", opt_json(b.kappa2)}, {"Tbar", opt_json(b.Tbar)},
        {"filter", {{"centers", centers}, {"delta", opt_json(b.filter.delta)}, {"p", ps}}}}}};
}

// The only environment override: the output directory.
inline constexpr const char *output_dir_env = "SPB_OUTPUT_DIR";

inline RunConfig load_config(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error &e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  RunConfig c = config_from_json(j);
  if (const char *env = std::getenv(output_dir_env); env && *env) c.output_dir = env;
  return c;
}

} // namespace spb
