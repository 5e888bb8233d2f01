#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "schac/config.hpp"
#include "schac/report.hpp"
#include "schac/solver.hpp"
#include "schac/stats.hpp"

using namespace schac;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

RunConfig base_config() {
  RunConfig c;
  c.n = 64;
  c.noise.amplitude = 0.0;
  c.problem.dt = 1e-4;
  c.problem.t_end = 0.01;
  c.time.record_every = 10;
  c.initial.kind = "modes";
  c.initial.mean = 0.1;
  c.initial.modes = {{{1}, 0.3, 0.2}, {{2}, 0.2, 0.7}};
  return c;
}

RunConfig noisy_config(double lg2 = 1.0) {
  RunConfig c = base_config();
  c.noise.lg2 = lg2;
  return c;
}

std::string csv_of(const TrajectoryRecord &rec) {
  std::ostringstream os;
  write_trajectory_csv(os, rec);
  return os.str();
}

SpectralField final_field(const TrajectoryRecord &rec, const GridPtr &g) {
  return SpectralField::from_values(g, rec.fields.back());
}

} // namespace

TEST_CASE("chemical potential examples", "[solver]") {
  auto g = make_grid(1, 64);
  const PotentialSpec spec;
  YosidaParams yp;
  yp.lambda = 0.01;
  const Potential yos{spec, yp, PotentialMode::yosida};
  const auto mu = chemical_potential(SpectralField::constant(g, 0.4), yos);
  const double expected = yosida_prime(spec, yp, 0.4) + regular_prime(spec, 0.4);
  for (double v : mu.values()) CHECK(v == Approx(expected).epsilon(1e-13));
  CHECK(max_abs(mu - SpectralField::constant(g, mu.mean())) < 1e-13);

  const Potential exact{spec, yp, PotentialMode::exact};
  CHECK(max_abs(chemical_potential(SpectralField::zeros(g), exact)) == 0.0);

  // Linearization: mu = (4 pi^2 + F''(0)) phi + O(eps^3), F''(0) = 2 theta - 2 theta0.
  const double eps = 1e-6;
  const auto phi = SpectralField::from_function(g, [&](const std::array<double, 3> &x) {
    return eps * std::cos(2.0 * pi * x[0]);
  });
  const auto lin = chemical_potential(phi, exact);
  const double factor = 4.0 * pi * pi + 2.0 * spec.theta - 2.0 * spec.theta0;
  CHECK(max_abs(lin - factor * phi) <= 1e-9 * eps * factor);
}

TEST_CASE("constant state is a fixed point without noise", "[solver]") {
  RunConfig c = base_config();
  c.initial.modes.clear();
  c.initial.mean = -0.35;
  for (auto mode : {PotentialMode::exact, PotentialMode::yosida}) {
    c.mode = mode;
    SimulateOptions opt;
    opt.keep_fields = true;
    const auto rec = simulate(c, 1, 0, opt);
    REQUIRE_FALSE(rec.failed);
    for (double v : rec.fields.back()) CHECK(v == Approx(-0.35).margin(1e-15));
  }
}

TEST_CASE("mode-1 linear rate matches linear stability", "[solver]") {
  RunConfig c = base_config();
  c.mode = PotentialMode::yosida;
  c.problem.lambda = 1e-4;
  c.problem.dt = 1e-5;
  c.initial.mean = 0.2;
  c.initial.modes = {{{1}, 1e-6, 0.0}};
  const auto g = c.make_grid();
  const Integrator integ(c, g);
  const WienerDriver w(1, 0, c.problem.dt);
  SolverState s;
  s.phi = initial_field(c, g);
  std::vector<double> ts, ls;
  for (int n = 0; n <= 1000; ++n) {
    if (n % 10 == 0) {
      ts.push_back(s.time);
      ls.push_back(std::log(std::abs(s.phi.spectrum()[1])));
    }
    if (n < 1000) s = integ.step(s, w);
  }
  const double q = 4.0 * pi * pi;
  const double f2 = psi_second(c.potential, 0.2) - 2.0 * c.potential.theta0;
  const double oracle = -q * (q + f2);
  const LinearFit fit = fit_line(ts, ls);
  CHECK(fit.slope == Approx(oracle).epsilon(0.02));
}

TEST_CASE("limit scheme conserves mass over 10^4 noisy steps", "[solver]") {
  RunConfig c = noisy_config(1.0);
  c.problem.t_end = 1.0;
  c.time.record_every = 100;
  const auto rec = simulate(c, 77, 0);
  REQUIRE_FALSE(rec.failed);
  REQUIRE(rec.steps_completed == 10000);
  CHECK(mass_gap(rec) <= 1e-12);
}

TEST_CASE("records are reproducible byte for byte", "[solver]") {
  RunConfig c = noisy_config(1.0);
  const auto a = csv_of(simulate(c, 5, 3));
  const auto b = csv_of(simulate(c, 5, 3));
  CHECK(a == b);
  CHECK(a != csv_of(simulate(c, 5, 4)));
}

TEST_CASE("halving dt on the same path converges", "[solver]") {
  RunConfig c = noisy_config(1.0);
  c.problem.t_end = 0.02;
  c.time.fine_dt = 1e-4 / 8.0;
  c.time.record_every = 1000000;
  const auto g = c.make_grid();
  std::vector<SpectralField> ends;
  for (double dt : {1e-4, 5e-5, 2.5e-5, 1.25e-5}) {
    c.problem.dt = dt;
    SimulateOptions opt;
    opt.keep_fields = true;
    const auto rec = simulate(c, 21, 0, opt);
    REQUIRE_FALSE(rec.failed);
    ends.push_back(final_field(rec, g));
  }
  const double d1 = l2_norm(ends[0] - ends[1]);
  const double d2 = l2_norm(ends[1] - ends[2]);
  const double d3 = l2_norm(ends[2] - ends[3]);
  CHECK(d2 < d1);
  CHECK(d3 < d2);
}

TEST_CASE("deterministic energy is nonincreasing", "[solver]") {
  RunConfig c = base_config();
  c.mode = PotentialMode::yosida;
  c.problem.lambda = 1e-2;
  c.problem.kappa = 2.0 * c.potential.theta0;
  c.problem.t_end = 0.2;
  c.time.record_every = 1;
  c.initial.kind = "random";
  c.initial.amplitude = 0.7;
  c.initial.bandwidth = 6;
  const auto rec = simulate(c, 1, 0);
  REQUIRE_FALSE(rec.failed);
  REQUIRE(rec.size() == 2001);
  for (std::size_t i = 1; i < rec.size(); ++i) CHECK(rec.energy_yosida[i] <= rec.energy_yosida[i - 1] + 1e-10);
  CHECK(rec.energy_yosida.back() < rec.energy_yosida.front());
}

TEST_CASE("energy examples", "[solver]") {
  auto g = make_grid(1, 64);
  const PotentialSpec spec;
  CHECK(energy(SpectralField::zeros(g), spec, PotentialMode::exact) == Approx(spec.offset).epsilon(1e-15));
  CHECK(spec.offset == spec.theta0);

  YosidaParams yp;
  yp.lambda = 0.05;
  const auto c = SpectralField::from_function(g, [](const std::array<double, 3> &x) { return std::cos(2.0 * pi * x[0]); });
  double pot = 0.0;
  for (double v : c.values()) pot += yosida_value(spec, yp, v) + regular_part(spec, v);
  pot /= static_cast<double>(g->size());
  const double grad_part = energy(c, spec, PotentialMode::yosida, yp) - pot - spec.offset;
  CHECK(grad_part == Approx(pi * pi).epsilon(1e-13));
}

TEST_CASE("Yosida energy never exceeds the exact energy", "[solver]") {
  auto g = make_grid(1, 64);
  const PotentialSpec spec;
  CounterRng rng(61, 0);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> v(g->size());
    for (auto &x : v) x = rng.uniform(-0.999, 0.999);
    const auto f = SpectralField::from_values(g, v);
    YosidaParams yp;
    yp.lambda = std::pow(10.0, rng.uniform(-4.0, -1.0));
    CHECK(energy(f, spec, PotentialMode::yosida, yp) <= energy(f, spec, PotentialMode::exact) + 1e-12);
  }
}

TEST_CASE("mass gap examples", "[solver]") {
  SECTION("limit scheme") {
    const auto rec = simulate(noisy_config(1.0), 3, 0);
    REQUIRE_FALSE(rec.failed);
    CHECK(mass_gap(rec) <= 1e-12);
  }
  SECTION("deterministic regularized scheme") {
    RunConfig c = base_config();
    c.problem.scheme = Scheme::regularized;
    c.problem.lambda = 1e-2;
    c.problem.xi = 5e-3;
    const auto rec = simulate(c, 3, 0);
    REQUIRE_FALSE(rec.failed);
    CHECK(mass_gap(rec) <= 1e-12);
  }
  SECTION("noisy regularized scheme") {
    RunConfig c = noisy_config(1.0);
    c.problem.scheme = Scheme::regularized;
    c.problem.lambda = 1e-2;
    c.problem.xi = 5e-3;
    const auto rec = simulate(c, 3, 0);
    REQUIRE_FALSE(rec.failed);
    const double gap = mass_gap(rec);
    CHECK(std::isfinite(gap));
    CHECK(gap > 0.0);
  }
}

TEST_CASE("bounded trajectories under small noise", "[solver]") {
  RunConfig c = noisy_config(0.1);
  c.problem.t_end = 0.1;
  for (std::uint32_t s = 0; s < 4; ++s) {
    const auto rec = simulate(c, 9, s);
    REQUIRE_FALSE(rec.failed);
    for (double m : rec.sup_abs_phi) CHECK(m < 1.0);
  }
}

TEST_CASE("exact potential aborts at the singularity", "[solver]") {
  RunConfig c = base_config();
  const auto g = c.make_grid();
  const Integrator integ(c, g);
  const WienerDriver w(1, 0, c.problem.dt);
  SolverState s;
  s.phi = SpectralField::constant(g, 1.0);
  s.step_index = 42;
  try {
    (void)integ.step(s, w);
    FAIL("expected DomainError");
  } catch (const DomainError &e) {
    CHECK(std::string(e.what()).find("step 42") != std::string::npos);
  }

  SimulateOptions opt;
  opt.initial = SpectralField::constant(g, 1.0);
  const auto rec = simulate(c, 1, 0, opt);
  CHECK(rec.failed);
  CHECK_FALSE(rec.failure.empty());
  CHECK(csv_of(rec).find("# failed:") != std::string::npos);
}

TEST_CASE("stabilization defaults to the Lipschitz constant of R'", "[solver]") {
  RunConfig c = base_config();
  const Integrator a(c, c.make_grid());
  CHECK(a.kappa() == 2.0 * c.potential.theta0);
  c.problem.kappa = 7.0;
  const Integrator b(c, c.make_grid());
  CHECK(b.kappa() == 7.0);
}

TEST_CASE("random initial data respects the configured bounds", "[solver]") {
  RunConfig c = base_config();
  c.initial.kind = "random";
  c.initial.mean = 0.5;
  c.initial.amplitude = 0.8;
  const auto g = c.make_grid();
  const auto f = initial_field(c, g);
  CHECK(is_band_limited(f));
  CHECK(max_abs(f) <= 0.95);
  CHECK(f.mean() == Approx(0.5).margin(0.05));
  const auto f2 = initial_field(c, g);
  CHECK(max_abs(f - f2) == 0.0);
}
