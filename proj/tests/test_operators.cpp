#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "schac/operators.hpp"
#include "schac/properties.hpp"

using namespace schac;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

SpectralField cos1(const GridPtr &g) {
  return SpectralField::from_function(g, [](const std::array<double, 3> &x) { return std::cos(2.0 * pi * x[0]); });
}

SpectralField zero_mean_random(const GridPtr &g, CounterRng &rng) {
  SpectralField v = random_field(g, rng, 12, rng.uniform(0.2, 2.0));
  std::vector<Complex> s(v.spectrum().begin(), v.spectrum().end());
  s[0] = Complex(0.0, 0.0);
  return SpectralField::from_spectrum(g, std::move(s));
}

} // namespace

TEST_CASE("A examples", "[operators]") {
  auto g = make_grid(1, 64);
  CHECK(max_abs(apply_A(SpectralField::constant(g, 0.7), {1.0, 0.0})) < 1e-15);
  CHECK(max_abs(apply_A(SpectralField::constant(g, 0.7), {0.5, 1.0})) < 1e-15);
  const auto c = cos1(g);
  CHECK(max_abs(apply_A(c, {1.0, 0.0}) - 4.0 * pi * pi * c) < 1e-11);
  CounterRng rng(41, 0);
  const auto v = zero_mean_random(g, rng);
  CHECK(max_abs(apply_A(v, {0.0, 1.0}) - v) < 1e-14);
}

TEST_CASE("N inverts A on zero-mean fields", "[operators]") {
  CounterRng rng(42, 0);
  for (int dim : {1, 2}) {
    auto g = make_grid(dim, 32);
    for (const MixedOperatorParams p : {MixedOperatorParams{1.0, 0.0}, {0.1, 0.5}, {0.0, 1.0}}) {
      const auto f = random_field(g, rng, 10, 1.0, 0.4);
      const auto back = apply_N(apply_A(f, p), p);
      CHECK(max_abs(back - (f - SpectralField::constant(g, f.mean()))) <= 1e-11);
    }
  }
  auto g = make_grid(1, 64);
  CHECK(max_abs(apply_N(cos1(g), {1.0, 0.0}) - (1.0 / (4.0 * pi * pi)) * cos1(g)) < 1e-15);
  CHECK(max_abs(apply_N(SpectralField::zeros(g), {1.0, 0.0})) == 0.0);
  CHECK_THROWS_AS(apply_N(SpectralField::constant(g, 1.0), {1.0, 0.0}), ContractViolation);
}

TEST_CASE("parameter validation", "[operators]") {
  CHECK_THROWS_AS((MixedOperatorParams{0.0, 0.0}.validate()), ContractViolation);
  CHECK_THROWS_AS((MixedOperatorParams{-1.0, 0.5}.validate()), ContractViolation);
  CHECK_THROWS_AS((MixedOperatorParams{1.0, 1.5}.validate()), ContractViolation);
  CHECK_THROWS_AS(ResolventParams{0.0}.validate(), ContractViolation);
}

TEST_CASE("star norm examples", "[operators]") {
  auto g = make_grid(1, 64);
  CHECK(dual_norm_star(SpectralField::zeros(g), {1.0, 0.0}) == 0.0);
  CHECK(dual_norm_star(cos1(g), {1.0, 0.0}) == Approx(1.0 / (2.0 * pi * std::sqrt(2.0))).epsilon(1e-13));
  CounterRng rng(43, 0);
  const auto v = zero_mean_random(g, rng);
  const MixedOperatorParams p{0.5, 0.5};
  CHECK(dual_norm_star(-3.0 * v, p) == Approx(3.0 * dual_norm_star(v, p)).epsilon(1e-14));
}

TEST_CASE("star norm equals the gradient of N v", "[operators]") {
  auto g = make_grid(2, 32);
  CounterRng rng(44, 0);
  for (const MixedOperatorParams p : {MixedOperatorParams{1.0, 0.0}, {0.1, 1.0}}) {
    const auto v = zero_mean_random(g, rng);
    CHECK(dual_norm_star(v, p) == Approx(gradient_seminorm(apply_N(v, p))).epsilon(1e-10));
  }
}

TEST_CASE("sharp norm examples", "[operators]") {
  auto g = make_grid(1, 64);
  const MixedOperatorParams p{1.0, 0.5};
  CHECK(dual_norm_sharp(SpectralField::constant(g, -0.3), p) == Approx(0.3).epsilon(1e-14));
  CounterRng rng(45, 0);
  const auto v = zero_mean_random(g, rng);
  CHECK(dual_norm_sharp(v, p) == Approx(dual_norm_star(v, p)).epsilon(1e-14));

  // Mode-by-mode recomputation from the definition.
  const auto f = random_field(g, rng, 20, 1.0, 0.2);
  double acc = 0.0;
  for (std::size_t i = 1; i < g->size(); ++i) {
    const double k = 2.0 * pi * static_cast<double>(g->wavevector(i)[0]);
    const double a = p.alpha * k * k + p.beta;
    acc += std::norm(f.spectrum()[i]) * k * k / (a * a);
  }
  const double direct = std::sqrt(acc + f.mean() * f.mean());
  CHECK(dual_norm_sharp(f, p) == Approx(direct).epsilon(1e-12));
}

TEST_CASE("sandwich between the star and V0 dual norms", "[operators]") {
  auto g = make_grid(1, 64);
  CounterRng rng(46, 0);
  const double cp2 = kPoincare * kPoincare;
  for (double alpha : {1.0, 0.5, 0.1}) {
    for (double beta : {0.0, 0.5, 1.0}) {
      const MixedOperatorParams p{alpha, beta};
      for (int rep = 0; rep < 50; ++rep) {
        const auto v = zero_mean_random(g, rng);
        const double star = dual_norm_star(v, p);
        const double v0 = v0_dual_norm(v);
        CHECK(alpha * star <= v0 * (1.0 + 1e-12));
        CHECK(v0 <= (alpha + cp2) * star * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("resolvent examples", "[operators]") {
  auto g = make_grid(1, 64);
  const auto c = SpectralField::constant(g, 0.45);
  CHECK(max_abs(resolvent_Rxi(c, {0.3}) - c) < 1e-15);
  CHECK(max_abs(resolvent_Rxi(cos1(g), {1.0}) - (1.0 / (1.0 + 4.0 * pi * pi)) * cos1(g)) < 1e-15);
  CounterRng rng(47, 0);
  const auto f = random_field(g, rng, 6, 1.0, 0.1);
  double prev = 1e300;
  for (double xi : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
    const double d = l2_norm(resolvent_Rxi(f, {xi}) - f);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("resolvent smoothing estimate", "[operators]") {
  auto g = make_grid(1, 64);
  CounterRng rng(48, 0);
  for (double xi : {1.0, 0.1, 0.01}) {
    for (int rep = 0; rep < 30; ++rep) {
      const auto f = random_field(g, rng, 20, 1.0);
      const auto r = resolvent_Rxi(f, {xi});
      const double lhs = xi * std::pow(gradient_seminorm(laplacian(r)), 2);
      const double rhs = 0.5 * std::pow(l2_norm(laplacian(f)), 2);
      CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("A is nonnegative and vanishes only on constants", "[operators]") {
  auto g = make_grid(2, 16);
  CounterRng rng(49, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto f = random_field(g, rng, 5, 1.0, 0.3);
    const MixedOperatorParams p{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    CHECK(inner(apply_A(f, p), f) > 0.0);
  }
  CHECK(std::abs(inner(apply_A(SpectralField::constant(g, 0.4), {1.0, 1.0}), SpectralField::constant(g, 0.4))) < 1e-15);
}
