#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "schac/noise.hpp"
#include "schac/properties.hpp"

using namespace schac;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

NoiseModel model_for(int dim, double lg2 = 1.0) {
  const NoiseShape shape;
  return NoiseModel(dim, 16, NoiseModel::amplitude_for(lg2, 16, 1.0, shape), 1.0, shape);
}

RegularizedNoise reg_for(double lambda, double xi) {
  RegularizedNoise r;
  r.yosida.lambda = lambda;
  r.resolvent.xi = xi;
  return r;
}

// Smooth band-limited profile used by the calculus oracles.
double profile(double x) { return 0.1 + 0.35 * std::cos(2.0 * pi * x + 0.4) + 0.2 * std::sin(4.0 * pi * x); }

} // namespace

TEST_CASE("truncated family reports the requested L_G^2", "[noise]") {
  for (double lg2 : {0.1, 1.0}) {
    const auto m = model_for(1, lg2);
    CHECK(m.lg2() == Approx(lg2).epsilon(1e-13));
    CHECK(m.active());
  }
  CHECK(model_for(1, 0.1).allen_cahn_uniqueness_small());
  CHECK(model_for(1, 0.1).vanishing_viscosity_small());
  CHECK_FALSE(model_for(1, 1.0).allen_cahn_uniqueness_small());
  CHECK(model_for(1, 1.0).vanishing_viscosity_small());
  CHECK_FALSE(model_for(1, 2.5).vanishing_viscosity_small());
  CHECK_THROWS_AS(NoiseModel(1, 4, 1.0, 0.5), ContractViolation);
}

TEST_CASE("L_G^2 grows with K and converges", "[noise]") {
  double prev = 0.0, prev_inc = 1e300;
  for (int k : {2, 4, 8, 16, 32, 64, 128}) {
    const double v = NoiseModel(1, k, 1.0, 1.0).lg2();
    CHECK(v > prev);
    CHECK(v - prev < prev_inc);
    prev_inc = v - prev;
    prev = v;
  }
  // sum k^{-2} -> pi^2 / 6 and ||h||_{W^{2,inf}} = 8 for the quartic shape.
  CHECK(prev <= 64.0 * pi * pi / 6.0);
}

TEST_CASE("axes cycle through the dimensions", "[noise]") {
  const auto m = model_for(2);
  CHECK(m.axis(1) == 0);
  CHECK(m.axis(2) == 1);
  CHECK(m.axis(3) == 0);
  CHECK(m.coefficient(4) == Approx(m.coefficient(1) / 4.0).epsilon(1e-15));
}

TEST_CASE("constant fields produce no noise", "[noise]") {
  auto g = make_grid(2, 16);
  const auto c = SpectralField::constant(g, 0.3);
  for (const auto &f : div_G_apply(c, model_for(2))) CHECK(max_abs(f) < 1e-15);
  for (const auto &f : K_lambda_xi_apply(c, model_for(2), reg_for(0.1, 0.05))) CHECK(max_abs(f) < 1e-15);
  CHECK(grad_div_G_hs_norm(c, model_for(2)) < 1e-14);
}

TEST_CASE("every div G output has exactly zero mean", "[noise]") {
  CounterRng rng(51, 0);
  for (int dim : {1, 2}) {
    auto g = make_grid(dim, 32);
    const auto m = model_for(dim);
    for (int rep = 0; rep < 20; ++rep) {
      const auto phi = random_field(g, rng, 8, 0.6, rng.uniform(-0.3, 0.3));
      for (const auto &f : div_G_apply(phi, m)) CHECK(f.mean() == 0.0);
      std::vector<double> dw(16);
      for (auto &x : dw) x = rng.normal();
      CHECK(div_G_increment(phi, m, dw).mean() == 0.0);
    }
  }
}

TEST_CASE("div G agrees with the chain-rule product", "[noise]") {
  auto g = make_grid(1, 64);
  const auto m = model_for(1);
  const auto phi = SpectralField::from_function(g, [](const std::array<double, 3> &x) { return profile(x[0]); });
  const auto slope = dealiased_map(phi, [](double s) { return QuarticShape{}.first(s); });
  const auto chain = dealiased_product(slope, partial(phi, 0));
  const auto out = div_G_apply(phi, m);
  REQUIRE(out.size() == 16);
  for (int k = 1; k <= 16; ++k) {
    CHECK(max_abs(out[k - 1] - m.coefficient(k) * chain) <= 1e-8);
  }
}

TEST_CASE("increment is the dW-weighted sum of the modes", "[noise]") {
  auto g = make_grid(2, 16);
  const auto m = model_for(2);
  CounterRng rng(52, 0);
  const auto phi = random_field(g, rng, 4, 0.8);
  std::vector<double> dw(16);
  for (auto &x : dw) x = rng.normal();
  const auto modes = div_G_apply(phi, m);
  SpectralField sum = SpectralField::zeros(g);
  for (int k = 0; k < 16; ++k) sum.axpy(dw[k], modes[k]);
  CHECK(max_abs(div_G_increment(phi, m, dw) - sum) < 1e-12);
}

TEST_CASE("div G is L_G-Lipschitz into V0*", "[noise]") {
  CounterRng rng(53, 0);
  auto g = make_grid(1, 64);
  const auto m = model_for(1);
  for (int rep = 0; rep < 100; ++rep) {
    const auto v = random_field(g, rng, 12, rng.uniform(0.05, 1.0));
    const auto w = random_field(g, rng, 12, rng.uniform(0.05, 1.0));
    CHECK(div_G_hs_distance(v, w, m, DualSpace::V0star) <= m.lg() * l2_norm(v - w) + 1e-6);
  }
}

TEST_CASE("div G local Lipschitz bound in H", "[noise]") {
  PropertyOptions opt;
  opt.seed = 54;
  const Check c = check_divG_local_lipschitz(opt);
  INFO(c.detail);
  CHECK(c.passed);
}

TEST_CASE("outside the unit ball div G reports the offending point", "[noise]") {
  auto g = make_grid(1, 16);
  std::vector<double> v(16, 0.0);
  v[9] = 1.5;
  const auto phi = SpectralField::from_values(g, v);
  try {
    (void)div_G_apply(phi, model_for(1));
    FAIL("expected DomainError");
  } catch (const DomainError &e) {
    CHECK(e.index() == 9);
    CHECK(e.value() == 1.5);
  }
}

TEST_CASE("K Lipschitz bound", "[noise][regularized]") {
  CounterRng rng(55, 0);
  auto g = make_grid(1, 64);
  const auto m = model_for(1);
  for (double xi : {0.1, 0.05}) {
    const auto reg = reg_for(0.1, xi);
    for (int rep = 0; rep < 100; ++rep) {
      const auto v = random_field(g, rng, 12, rng.uniform(0.05, 1.0));
      const auto w = random_field(g, rng, 12, rng.uniform(0.05, 1.0));
      const double lhs = std::pow(K_lambda_xi_hs_distance(v, w, m, reg), 2);
      const double wv2 = std::pow(l2_norm(w), 2) + std::pow(gradient_seminorm(w), 2);
      const double rhs = 2.0 * m.lg2() / (xi * xi) * (1.0 + wv2) * std::pow(l2_norm(v - w), 2);
      CHECK(lhs <= rhs);
    }
  }
}

TEST_CASE("K approaches div G as lambda and xi shrink", "[noise][regularized]") {
  auto g = make_grid(1, 64);
  const auto m = model_for(1);
  const auto phi = SpectralField::from_function(g, [](const std::array<double, 3> &x) { return profile(x[0]); });
  REQUIRE(max_abs(phi) <= 0.9);
  const auto target = div_G_apply(phi, m);
  std::vector<double> errs;
  for (double lam : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto k = K_lambda_xi_apply(phi, m, reg_for(lam, lam / 2.0));
    double err = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) err = std::max(err, l2_norm(k[i] - target[i]));
    if (!errs.empty()) CHECK(err < errs.back());
    errs.push_back(err);
  }
  // First order in lambda once lambda is small.
  CHECK(errs[3] < errs[2] / 5.0);
  CHECK(errs[3] < 1e-2 * l2_norm(target[0]));
}

TEST_CASE("K increment uses the supplied slope", "[noise][regularized]") {
  auto g = make_grid(1, 32);
  const auto m = model_for(1);
  const auto reg = reg_for(0.05, 0.02);
  CounterRng rng(56, 0);
  const auto phi = random_field(g, rng, 6, 0.7);
  std::vector<double> dw(16);
  for (auto &x : dw) x = rng.normal();
  const auto slope =
      dealiased_map(phi, [&](double s) { return m.shape().first(resolvent_J(reg.spec, reg.yosida, s)); });
  const auto modes = K_lambda_xi_apply(phi, m, reg);
  SpectralField sum = SpectralField::zeros(g);
  for (int k = 0; k < 16; ++k) sum.axpy(dw[k], modes[k]);
  CHECK(max_abs(K_lambda_xi_increment(phi, slope, m, reg.resolvent, dw) - sum) < 1e-12);
}

TEST_CASE("grad div G matches a finite-difference evaluation", "[noise]") {
  auto g = make_grid(1, 64);
  const auto m = model_for(1);
  const auto phi = SpectralField::from_function(g, [](const std::array<double, 3> &x) { return profile(x[0]); });
  const QuarticShape h;
  // Fourth-order central second difference of x -> h(phi(x)).
  const double d = 1e-3;
  double norm2 = 0.0;
  for (std::size_t j = 0; j < g->size(); ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(g->size());
    auto f = [&](double y) { return h.value(profile(y)); };
    const double dd =
        (-f(x + 2 * d) + 16.0 * f(x + d) - 30.0 * f(x) + 16.0 * f(x - d) - f(x - 2 * d)) / (12.0 * d * d);
    norm2 += dd * dd;
  }
  norm2 /= static_cast<double>(g->size());
  double coeff2 = 0.0;
  for (int k = 1; k <= 16; ++k) coeff2 += m.coefficient(k) * m.coefficient(k);
  const double fd = std::sqrt(coeff2 * norm2);
  CHECK(grad_div_G_hs_norm(phi, m) == Approx(fd).epsilon(1e-6));
}

TEST_CASE("grad div G energy bound", "[noise]") {
  PropertyOptions opt;
  opt.seed = 57;
  const Check c = check_grad_divG_bound(opt);
  INFO(c.detail);
  CHECK(c.passed);
}

TEST_CASE("tabulated shape", "[noise]") {
  // sin(pi s) has h'' = 0 at +-1, matching the natural end conditions.
  auto exact = [](double x) { return std::sin(pi * x); };
  std::vector<double> s, v;
  for (int i = 0; i <= 40; ++i) {
    const double x = -1.0 + 0.05 * i;
    s.push_back(x);
    v.push_back(exact(x));
  }
  const TabulatedShape t(s, v);
  for (double x : {-0.97, -0.5, 0.0, 0.33, 0.8}) {
    CHECK(t.value(x) == Approx(exact(x)).margin(1e-5));
    CHECK(t.first(x) == Approx(pi * std::cos(pi * x)).margin(2e-3));
    // Spline curvature error is about ds^2 h'''' / 12 = 0.02.
    CHECK(t.second(x) == Approx(-pi * pi * exact(x)).margin(5e-2));
  }
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(t.value(s[i]) == Approx(v[i]).margin(1e-14));
  const NoiseShape shape(t);
  CHECK(shape.w2inf_norm() == Approx(pi * pi).epsilon(0.01));

  CHECK_THROWS_AS(TabulatedShape({-1.0, 1.0}, {0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(TabulatedShape({-1.0, 0.2, 0.9}, {0.0, 1.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(TabulatedShape({-1.0, 0.5, 0.2, 1.0}, {0.0, 1.0, 1.0, 0.0}), ConfigError);
}
