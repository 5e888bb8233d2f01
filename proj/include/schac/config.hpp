#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "schac/errors.hpp"
#include "schac/noise.hpp"
#include "schac/operators.hpp"
#include "schac/potential.hpp"

namespace schac {

enum class Scheme { limit, regularized };

inline Scheme parse_scheme(const std::string &s) {
  if (s == "limit") return Scheme::limit;
  if (s == "regularized") return Scheme::regularized;
  throw ConfigError("unknown scheme '" + s + "' (expected limit|regularized)");
}

inline const char *to_string(Scheme s) { return s == Scheme::limit ? "limit" : "regularized"; }

/// Coefficients of the mixed equation and time-stepping choices.
struct ProblemParams {
  double alpha = 1.0;
  double beta = 0.0;
  Scheme scheme = Scheme::limit;
  double lambda = 1e-2; ///< Yosida parameter (regularized scheme, yosida mode)
  double xi = 5e-3;     ///< resolvent smoothing (regularized scheme)
  std::optional<double> kappa; ///< stabilization; defaults to C_R = 2 theta0
  double dt = 1e-4;
  double t_end = 0.5;

  MixedOperatorParams mixed() const { return {alpha, beta}; }

  double stabilization(const PotentialSpec &spec) const { return kappa.value_or(spec.regular_lipschitz()); }

  void validate() const {
    mixed().validate();
    if (scheme == Scheme::regularized && !(xi > 0.0 && xi < lambda)) {
      throw ContractViolation("ProblemParams: regularized scheme needs 0 < xi < lambda");
    }
    if (!(lambda > 0.0)) throw ContractViolation("ProblemParams: lambda must be positive");
    if (kappa && !(*kappa >= 0.0)) throw ContractViolation("ProblemParams: kappa must be >= 0");
    if (!(dt > 0.0)) throw ContractViolation("ProblemParams: dt must be positive");
    if (!(t_end >= 0.0)) throw ContractViolation("ProblemParams: t_end must be >= 0");
  }
};

struct TimeConfig {
  int record_every = 50;
  double fine_dt = 0.0;   ///< base step of the Brownian path; 0 means dt
  int snapshot_every = 0; ///< write a snapshot file every n records (0: never)
};

struct ModeSpec {
  std::vector<long> k;
  double amplitude = 0.0;
  double phase = 0.0;
};

struct InitialConfig {
  std::string kind = "modes"; ///< modes | random | snapshot
  double mean = 0.0;
  std::vector<ModeSpec> modes;
  int bandwidth = 4;          ///< random: highest wavenumber per axis
  double amplitude = 0.5;     ///< random: target max |phi - mean| before clamping
  std::uint64_t seed = 7;     ///< random: seed of the initial field
  std::string path;           ///< snapshot: file to load
};

struct NoiseConfig {
  int num_modes = 16;
  double amplitude = 0.0;
  std::optional<double> lg2; ///< when set, amplitude is derived from it
  double decay = 1.0;
  std::string shape = "quartic"; ///< quartic | custom-table
  std::vector<double> table_s, table_h;
  std::uint64_t seed = 1;
};

struct RunConfig {
  int dim = 1;
  std::size_t n = 128;
  PotentialSpec potential;
  PotentialMode mode = PotentialMode::exact;
  double newton_tol = 1e-12;
  int newton_max_iter = 200;
  NoiseConfig noise;
  ProblemParams problem;
  TimeConfig time;
  InitialConfig initial;

  GridPtr make_grid() const { return schac::make_grid(dim, n); }

  NoiseShape noise_shape() const {
    if (noise.shape == "quartic") return NoiseShape(QuarticShape{});
    if (noise.shape == "custom-table") return NoiseShape(TabulatedShape(noise.table_s, noise.table_h));
    throw ConfigError("unknown noise shape '" + noise.shape + "' (expected quartic|custom-table)");
  }

  NoiseModel noise_model() const {
    NoiseShape shape = noise_shape();
    const double amp =
        noise.lg2 ? NoiseModel::amplitude_for(*noise.lg2, noise.num_modes, noise.decay, shape) : noise.amplitude;
    return NoiseModel(dim, noise.num_modes, amp, noise.decay, std::move(shape));
  }

  YosidaParams yosida() const { return {problem.lambda, newton_tol, newton_max_iter}; }

  /// Potential that drives the dynamics: the regularized scheme always uses F_lambda.
  Potential dynamics_potential() const {
    const PotentialMode m = problem.scheme == Scheme::regularized ? PotentialMode::yosida : mode;
    return {potential, yosida(), m};
  }

  void validate() const {
    if (dim < 1 || dim > 3) throw ConfigError("grid.dim must be 1, 2 or 3");
    potential.validate();
    yosida().validate();
    problem.validate();
    if (time.record_every < 1) throw ConfigError("time.record_every must be >= 1");
    if (time.fine_dt < 0.0) throw ConfigError("time.fine_dt must be >= 0");
    if (std::abs(initial.mean) > 0.9 + 1e-15) throw ConfigError("initial.mean must satisfy |mean| <= 1 - 0.1");
    (void)noise_model();
  }
};

namespace detail {
template <class T>
void read(const nlohmann::json &j, const char *key, T &out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception &e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }
}
} // namespace detail

inline RunConfig config_from_json(const nlohmann::json &j) try {
  using detail::read;
  RunConfig c;
  if (j.contains("grid")) {
    const auto &g = j["grid"];
    read(g, "dim", c.dim);
    read(g, "n", c.n);
  }
  if (j.contains("potential")) {
    const auto &p = j["potential"];
    read(p, "theta", c.potential.theta);
    read(p, "theta0", c.potential.theta0);
    c.potential.offset = c.potential.theta0;
    read(p, "offset", c.potential.offset);
    read(p, "lambda", c.problem.lambda);
    read(p, "newton_tol", c.newton_tol);
    read(p, "newton_max_iter", c.newton_max_iter);
    if (p.contains("mode")) c.mode = parse_potential_mode(p["mode"].get<std::string>());
  }
  if (j.contains("noise")) {
    const auto &n = j["noise"];
    read(n, "num_modes", c.noise.num_modes);
    read(n, "amplitude", c.noise.amplitude);
    if (n.contains("lg2")) c.noise.lg2 = n["lg2"].get<double>();
    read(n, "decay", c.noise.decay);
    read(n, "shape", c.noise.shape);
    read(n, "seed", c.noise.seed);
    if (n.contains("table")) {
      for (const auto &row : n["table"]) {
        c.noise.table_s.push_back(row.at(0).get<double>());
        c.noise.table_h.push_back(row.at(1).get<double>());
      }
    }
  }
  if (j.contains("problem")) {
    const auto &p = j["problem"];
    read(p, "alpha", c.problem.alpha);
    read(p, "beta", c.problem.beta);
    read(p, "lambda", c.problem.lambda);
    if (p.contains("scheme")) c.problem.scheme = parse_scheme(p["scheme"].get<std::string>());
    if (p.contains("xi")) {
      read(p, "xi", c.problem.xi);
    } else if (p.contains("xi_ratio")) {
      c.problem.xi = p["xi_ratio"].get<double>() * c.problem.lambda;
    } else {
      c.problem.xi = 0.5 * c.problem.lambda;
    }
    if (p.contains("kappa")) c.problem.kappa = p["kappa"].get<double>();
  }
  if (j.contains("time")) {
    const auto &t = j["time"];
    read(t, "dt", c.problem.dt);
    read(t, "t_end", c.problem.t_end);
    read(t, "record_every", c.time.record_every);
    read(t, "fine_dt", c.time.fine_dt);
    read(t, "snapshot_every", c.time.snapshot_every);
  }
  if (j.contains("initial")) {
    const auto &i = j["initial"];
    read(i, "kind", c.initial.kind);
    read(i, "mean", c.initial.mean);
    read(i, "bandwidth", c.initial.bandwidth);
    read(i, "amplitude", c.initial.amplitude);
    read(i, "seed", c.initial.seed);
    read(i, "path", c.initial.path);
    if (i.contains("modes")) {
      for (const auto &m : i["modes"]) {
        ModeSpec ms;
        ms.k = m.at("k").get<std::vector<long>>();
        ms.amplitude = m.at("amplitude").get<double>();
        if (m.contains("phase")) ms.phase = m["phase"].get<double>();
        c.initial.modes.push_back(std::move(ms));
      }
    }
  }
  c.validate();
  return c;
} catch (const nlohmann::json::exception &e) {
  throw ConfigError(std::string("config: ") + e.what());
}

inline RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

/// Canonical echo of a configuration (all defaults filled in).
inline nlohmann::json config_to_json(const RunConfig &c) {
  nlohmann::json j;
  j["grid"] = {{"dim", c.dim}, {"n", c.n}};
  j["potential"] = {{"theta", c.potential.theta},     {"theta0", c.potential.theta0},
                    {"offset", c.potential.offset},   {"lambda", c.problem.lambda},
                    {"mode", to_string(c.mode)},      {"newton_tol", c.newton_tol},
                    {"newton_max_iter", c.newton_max_iter}};
  nlohmann::json noise = {{"num_modes", c.noise.num_modes},
                          {"amplitude", c.noise_model().amplitude()},
                          {"decay", c.noise.decay},
                          {"shape", c.noise.shape},
                          {"seed", c.noise.seed}};
  if (c.noise.lg2) noise["lg2"] = *c.noise.lg2;
  if (!c.noise.table_s.empty()) {
    nlohmann::json table = nlohmann::json::array();
    for (std::size_t i = 0; i < c.noise.table_s.size(); ++i) table.push_back({c.noise.table_s[i], c.noise.table_h[i]});
    noise["table"] = table;
  }
  j["noise"] = noise;
  nlohmann::json problem = {{"alpha", c.problem.alpha},
                            {"beta", c.problem.beta},
                            {"scheme", to_string(c.problem.scheme)},
                            {"lambda", c.problem.lambda},
                            {"xi", c.problem.xi}};
  if (c.problem.kappa) problem["kappa"] = *c.problem.kappa;
  j["problem"] = problem;
  j["time"] = {{"dt", c.problem.dt},
               {"t_end", c.problem.t_end},
               {"record_every", c.time.record_every},
               {"fine_dt", c.time.fine_dt},
               {"snapshot_every", c.time.snapshot_every}};
  nlohmann::json modes = nlohmann::json::array();
  for (const auto &m : c.initial.modes) modes.push_back({{"k", m.k}, {"amplitude", m.amplitude}, {"phase", m.phase}});
  j["initial"] = {{"kind", c.initial.kind},     {"mean", c.initial.mean},
                  {"modes", modes},             {"bandwidth", c.initial.bandwidth},
                  {"amplitude", c.initial.amplitude}, {"seed", c.initial.seed},
                  {"path", c.initial.path}};
  return j;
}

/// FNV-1a, used to fingerprint configurations in report manifests.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string config_hash(const RunConfig &c) {
  std::ostringstream os;
  os << std::hex << fnv1a64(config_to_json(c).dump());
  return os.str();
}

} // namespace schac
