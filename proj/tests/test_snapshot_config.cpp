#include <catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "schac/config.hpp"
#include "schac/experiments.hpp"
#include "schac/snapshot.hpp"

using namespace schac;

#ifndef SCHAC_CONFIG_DIR
#define SCHAC_CONFIG_DIR "configs"
#endif

TEST_CASE("snapshot round trip is bit-exact", "[snapshot]") {
  for (int dim : {1, 2, 3}) {
    auto g = make_grid(dim, dim == 3 ? 8 : 16);
    CounterRng rng(71, static_cast<std::uint32_t>(dim));
    std::vector<double> v(g->size());
    for (auto &x : v) x = rng.normal() * 1e-3 + rng.uniform(-0.5, 0.5);
    v[0] = -0.0;
    const auto f = SpectralField::from_values(g, v);
    std::stringstream ss;
    write_snapshot(ss, "phi", 0.125, f);
    const Snapshot s = read_snapshot(ss);
    CHECK(s.dim == dim);
    CHECK(s.n == g->points_per_axis());
    CHECK(s.name == "phi");
    CHECK(s.time == 0.125);
    REQUIRE(s.values.size() == v.size());
    CHECK(std::memcmp(s.values.data(), v.data(), v.size() * sizeof(double)) == 0);
    const auto back = snapshot_field(s, g);
    CHECK(max_abs(back - f) == 0.0);
  }
}

TEST_CASE("snapshot header is readable text followed by little-endian doubles", "[snapshot]") {
  auto g = make_grid(1, 4);
  const auto f = SpectralField::from_values(g, {1.0, 2.0, -3.5, 0.25});
  std::stringstream ss;
  write_snapshot(ss, "mu", 1.5, f);
  const std::string raw = ss.str();
  CHECK(raw.rfind(kSnapshotMagic, 0) == 0);
  const auto end = raw.find("END\n");
  REQUIRE(end != std::string::npos);
  const std::string payload = raw.substr(end + 4);
  REQUIRE(payload.size() == 32);
  // 1.0 = 0x3ff0000000000000, low byte first.
  const unsigned char one[8] = {0, 0, 0, 0, 0, 0, 0xf0, 0x3f};
  CHECK(std::memcmp(payload.data(), one, 8) == 0);
}

TEST_CASE("snapshot errors", "[snapshot]") {
  {
    std::stringstream ss("NOT-A-FIELD\n");
    CHECK_THROWS_AS(read_snapshot(ss), Error);
  }
  {
    std::stringstream ss(std::string(kSnapshotMagic) + "\ndim 1\nn 4\nendian little\nEND\n" + std::string(16, '\0'));
    CHECK_THROWS_AS(read_snapshot(ss), Error);
  }
  {
    std::stringstream ss(std::string(kSnapshotMagic) + "\ndim 1\nn 4\nendian big\nEND\n");
    CHECK_THROWS_AS(read_snapshot(ss), Error);
  }
  auto g = make_grid(1, 8);
  std::stringstream ss;
  write_snapshot(ss, "phi", 0.0, SpectralField::zeros(make_grid(1, 16)));
  CHECK_THROWS_AS(snapshot_field(read_snapshot(ss), g), ContractViolation);
  std::stringstream bad;
  CHECK_THROWS(write_snapshot(bad, "two words", 0.0, SpectralField::zeros(g)));
  CHECK_THROWS_AS(read_snapshot(std::string("/nonexistent/phi.field")), Error);
}

TEST_CASE("snapshot feeds initial data", "[snapshot][config]") {
  const auto dir = std::filesystem::temp_directory_path() / "schac_snapshot_test";
  std::filesystem::create_directories(dir);
  auto g = make_grid(1, 32);
  CounterRng rng(72, 0);
  std::vector<double> v(32);
  for (auto &x : v) x = rng.uniform(-0.5, 0.5);
  const auto f = truncate(SpectralField::from_values(g, v));
  const auto path = (dir / "init.field").string();
  write_snapshot(path, "phi", 0.0, f);
  RunConfig c;
  c.n = 32;
  c.initial.kind = "snapshot";
  c.initial.path = path;
  // Re-truncation round-trips through the transform.
  CHECK(max_abs(initial_field(c, g) - f) <= 1e-15);
}

TEST_CASE("config JSON round trip", "[config]") {
  const nlohmann::json j = nlohmann::json::parse(R"({
    "grid": {"dim": 2, "n": 32},
    "potential": {"theta": 0.8, "theta0": 1.5, "mode": "yosida", "lambda": 0.02},
    "noise": {"num_modes": 8, "lg2": 0.1, "decay": 1.5, "seed": 99},
    "problem": {"alpha": 0.3, "beta": 1.0, "scheme": "regularized", "xi": 0.004, "kappa": 5.0},
    "time": {"dt": 2e-4, "t_end": 0.25, "record_every": 5, "snapshot_every": 2},
    "initial": {"kind": "modes", "mean": 0.1, "modes": [{"k": [1, 2], "amplitude": 0.2, "phase": 0.5}]}
  })");
  const RunConfig c = config_from_json(j);
  CHECK(c.dim == 2);
  CHECK(c.n == 32);
  CHECK(c.potential.theta == 0.8);
  CHECK(c.potential.offset == 1.5);
  CHECK(c.mode == PotentialMode::yosida);
  CHECK(c.problem.lambda == 0.02);
  CHECK(c.problem.xi == 0.004);
  CHECK(*c.problem.kappa == 5.0);
  CHECK(c.problem.scheme == Scheme::regularized);
  CHECK(c.noise_model().lg2() == Catch::Approx(0.1).epsilon(1e-13));
  CHECK(c.noise.seed == 99);
  CHECK(c.time.snapshot_every == 2);
  REQUIRE(c.initial.modes.size() == 1);
  CHECK(c.initial.modes[0].k == std::vector<long>{1, 2});

  const RunConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  RunConfig other = c;
  other.problem.alpha = 0.31;
  CHECK(config_hash(other) != config_hash(c));
}

TEST_CASE("defaults follow the documented choices", "[config]") {
  const RunConfig c = config_from_json(nlohmann::json::object());
  CHECK(c.dim == 1);
  CHECK(c.n == 128);
  CHECK(c.potential.theta == 1.0);
  CHECK(c.potential.theta0 == 2.0);
  CHECK(c.potential.offset == 2.0);
  CHECK(c.problem.stabilization(c.potential) == 4.0);
  CHECK(c.problem.dt == 1e-4);
  CHECK(c.problem.t_end == 0.5);
  CHECK(c.noise.num_modes == 16);
  CHECK(c.noise.decay == 1.0);
  CHECK(c.problem.xi == 0.5 * c.problem.lambda);
}

TEST_CASE("invalid configurations are rejected", "[config]") {
  using nlohmann::json;
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"problem": {"scheme": "implicit"}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"potential": {"mode": "obstacle"}})")), Error);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"initial": {"mean": 0.95}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"grid": {"n": "big"}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"noise": {"lg2": "x"}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"time": {"record_every": 0}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"noise": {"shape": "gaussian"}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"problem": {"scheme": "regularized", "lambda": 0.01, "xi": 0.02}})")),
                  Error);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"problem": {"alpha": 0.0, "beta": 0.0}})")), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("shipped configurations load", "[config]") {
  const std::filesystem::path dir(SCHAC_CONFIG_DIR);
  REQUIRE(std::filesystem::is_directory(dir));
  int count = 0;
  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path().string()));
    std::ifstream in(entry.path());
    if (nlohmann::json::parse(in).contains("experiment")) CHECK_NOTHROW(load_plan(entry.path().string()));
    ++count;
  }
  CHECK(count >= 8);
}

TEST_CASE("experiment plans validate their grids", "[config]") {
  using nlohmann::json;
  const auto plan = plan_from_json(json::parse(R"({"experiment": {"kind": "mass_gap", "lambdas": [0.1, 0.01]}})"));
  CHECK(plan.kind == ExperimentKind::mass_gap);
  CHECK(plan.lambdas.size() == 2);
  CHECK_THROWS_AS(plan_from_json(json::parse(R"({"experiment": {"kind": "mass_gap", "lambdas": [0.01, 0.1]}})")),
                  ConfigError);
  CHECK_THROWS_AS(plan_from_json(json::parse(R"({"experiment": {"kind": "nonsense"}})")), ConfigError);
  CHECK_THROWS_AS(plan_from_json(json::parse(R"({"experiment": {"paths": 0}})")), ConfigError);
}
