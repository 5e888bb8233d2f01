#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "schac/grid.hpp"
#include "schac/noise.hpp"
#include "schac/operators.hpp"
#include "schac/potential.hpp"
#include "schac/report.hpp"
#include "schac/rng.hpp"

namespace schac {

/// Smooth random field: in-band modes with |k_a| <= bandwidth, amplitudes
/// decaying like (1+|k|^2)^-1, rescaled so that max|f - mean| = amplitude.
inline SpectralField random_field(const GridPtr &grid, CounterRng &rng, int bandwidth, double amplitude,
                                  double mean = 0.0) {
  std::vector<Complex> s(grid->size(), Complex(0.0, 0.0));
  for (std::size_t i = 1; i < s.size(); ++i) {
    const auto &k = grid->wavevector(i);
    bool inside = grid->in_band(i);
    double k2 = 0.0;
    for (int a = 0; a < grid->dim(); ++a) {
      inside = inside && std::abs(k[a]) <= bandwidth;
      k2 += static_cast<double>(k[a]) * static_cast<double>(k[a]);
    }
    const double re = rng.normal();
    const double im = rng.normal();
    if (inside) s[i] = Complex(re, im) / (1.0 + k2);
  }
  SpectralField f = SpectralField::from_spectrum(grid, std::move(s));
  const double peak = max_abs(f);
  if (peak > 0.0) f *= amplitude / peak;
  if (mean != 0.0) f += SpectralField::constant(grid, mean);
  return f;
}

struct PropertyOptions {
  std::uint64_t seed = 20240901;
  int cases = 100;             ///< random cases per inequality check
  int sandwich_fields = 1000;  ///< random fields per (alpha, beta) cell
  StarWeight star_weight = default_star_weight; ///< replaceable for fault injection
  NoiseModel noise = NoiseModel(1, 16, 0.0, 1.0);
  bool noise_set = false;

  /// Generic noise model with L_G^2 = 1 on dimension `dim`.
  NoiseModel noise_for(int dim) const {
    if (noise_set && noise.dim() == dim) return noise;
    NoiseShape shape;
    return NoiseModel(dim, 16, NoiseModel::amplitude_for(1.0, 16, 1.0, shape), 1.0, shape);
  }
};

namespace detail {
/// Relative slack for inequalities evaluated in floating point.
inline constexpr double kRelSlack = 1e-12;

inline Check finish(std::string id, bool ok, double worst, double bound, std::string detail) {
  Check c;
  c.id = std::move(id);
  c.passed = ok;
  c.measured = worst;
  c.bound = bound;
  c.detail = std::move(detail);
  return c;
}

/// Grids used for the random inequality checks: case i alternates between d = 1 and d = 2.
inline GridPtr case_grid(int i) {
  static const GridPtr g1 = make_grid(1, 64);
  static const GridPtr g2 = make_grid(2, 32);
  return i % 2 == 0 ? g1 : g2;
}

inline int case_bandwidth(const GridPtr &g) { return g->dim() == 1 ? 12 : 6; }
} // namespace detail

/// alpha ||v||_* <= ||v||_{V0*} <= (alpha + C_P^2) ||v||_* on random zero-mean fields.
inline Check check_star_norm_sandwich(const PropertyOptions &opt) {
  CounterRng rng(opt.seed, 1);
  const GridPtr g = make_grid(1, 64);
  const double tol = 1e-8;
  const double cp2 = kPoincare * kPoincare;
  double worst = -std::numeric_limits<double>::infinity();
  std::string where;
  int fails = 0, total = 0;
  const std::vector<SpectralField> fields = [&] {
    std::vector<SpectralField> f;
    for (int i = 0; i < opt.sandwich_fields; ++i) {
      SpectralField v = random_field(g, rng, 20, rng.uniform(0.1, 2.0));
      v -= SpectralField::constant(g, v.mean());
      auto s = std::vector<Complex>(v.spectrum().begin(), v.spectrum().end());
      s[0] = Complex(0.0, 0.0);
      f.push_back(SpectralField::from_spectrum(g, std::move(s)));
    }
    return f;
  }();
  for (double alpha : {1.0, 0.5, 0.1}) {
    for (double beta : {0.0, 0.5, 1.0}) {
      const MixedOperatorParams p{alpha, beta};
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const double star = dual_norm_star(fields[i], p, opt.star_weight);
        const double v0 = v0_dual_norm(fields[i]);
        // Normalized violations: positive means the inequality fails.
        const double lo = (alpha * star - v0) / v0;
        const double hi = (v0 - (alpha + cp2) * star) / v0;
        const double m = std::max(lo, hi);
        ++total;
        if (m > tol) ++fails;
        if (m > worst) {
          worst = m;
          where = fmt::format("alpha={} beta={} field={}", alpha, beta, i);
        }
      }
    }
  }
  return detail::finish("star_norm_sandwich", fails == 0, worst, tol,
                        fmt::format("{} of {} cases violate; worst at {}", fails, total, where));
}

/// (alpha / sqrt(4(1+C_P^2)+alpha^2)) ||v||_# <= ||v||_{V*} <= (alpha + C_P^2 + 1) ||v||_#.
inline Check check_sharp_sandwich(const PropertyOptions &opt) {
  CounterRng rng(opt.seed, 2);
  const GridPtr g = make_grid(1, 64);
  const double cp2 = kPoincare * kPoincare;
  double worst = -std::numeric_limits<double>::infinity();
  int fails = 0, total = 0;
  for (double alpha : {1.0, 0.5, 0.1}) {
    for (double beta : {0.0, 0.5, 1.0}) {
      const MixedOperatorParams p{alpha, beta};
      for (int i = 0; i < opt.cases; ++i) {
        const SpectralField v = random_field(g, rng, 20, rng.uniform(0.1, 2.0), rng.uniform(-1.0, 1.0));
        const double sharp = dual_norm_sharp(v, p);
        const double vs = v_dual_norm(v);
        const double lo_c = alpha / std::sqrt(4.0 * (1.0 + cp2) + alpha * alpha);
        const double m = std::max((lo_c * sharp - vs) / vs, (vs - (alpha + cp2 + 1.0) * sharp) / vs);
        ++total;
        if (m > detail::kRelSlack) ++fails;
        worst = std::max(worst, m);
      }
    }
  }
  return detail::finish("sharp_norm_sandwich", fails == 0, worst, detail::kRelSlack,
                        fmt::format("{} of {} cases violate", fails, total));
}

/// ||div G(v) - div G(w)||_{L2(U,V0*)} <= L_G ||v - w||_H + 1e-6 for |v|, |w| <= 1.
inline Check check_divG_lipschitz_v0star(const PropertyOptions &opt) {
  CounterRng rng(opt.seed, 3);
  const double eps = 1e-6;
  double worst = -std::numeric_limits<double>::infinity();
  int fails = 0;
  for (int i = 0; i < opt.cases; ++i) {
    const GridPtr g = detail::case_grid(i);
    const NoiseModel model = opt.noise_for(g->dim());
    const int bw = detail::case_bandwidth(g);
    const SpectralField v = random_field(g, rng, bw, rng.uniform(0.05, 1.0));
    const SpectralField w = random_field(g, rng, bw, rng.uniform(0.05, 1.0));
    const double lhs = div_G_hs_distance(v, w, model, DualSpace::V0star);
    const double rhs = model.lg() * l2_norm(v - w) + eps;
    if (lhs > rhs) ++fails;
    worst = std::max(worst, lhs - rhs);
  }
  return detail::finish("divG_lipschitz_V0star", fails == 0, worst, 0.0,
                        fmt::format("{} of {} pairs violate (measured: max lhs - rhs)", fails, opt.cases));
}

/// ||div G(v) - div G(w)||^2_{L2(U,H)} <= 2 L_G^2 (||grad w (v-w)||^2 + ||grad(v-w)||^2).
inline Check check_divG_local_lipschitz(const PropertyOptions &opt) {
  CounterRng rng(opt.seed, 4);
  double worst = -std::numeric_limits<double>::infinity();
  int fails = 0;
  for (int i = 0; i < opt.cases; ++i) {
    const GridPtr g = detail::case_grid(i);
    const NoiseModel model = opt.noise_for(g->dim());
    const int bw = detail::case_bandwidth(g);
    const SpectralField v = random_field(g, rng, bw, rng.uniform(0.05, 1.0));
    const SpectralField w = random_field(g, rng, bw, rng.uniform(0.05, 1.0));
    const double lhs = std::pow(div_G_hs_distance(v, w, model, DualSpace::H), 2);
    const SpectralField d = v - w;
    double cross = 0.0;
    const auto dv = d.values();
    for (int a = 0; a < g->dim(); ++a) {
      const SpectralField pw = partial(w, a);
      const auto gw = pw.values();
      for (std::size_t j = 0; j < dv.size(); ++j) cross += std::pow(gw[j] * dv[j], 2);
    }
    cross /= static_cast<double>(dv.size());
    const double rhs = 2.0 * model.lg2() * (cross + std::pow(gradient_seminorm(d), 2));
    const double m = (lhs - rhs) / rhs;
    if (m > detail::kRelSlack) ++fails;
    worst = std::max(worst, m);
  }
  return detail::finish("divG_local_lipschitz_H", fails == 0, worst, detail::kRelSlack,
                        fmt::format("{} of {} pairs violate (measured: max relative excess)", fails, opt.cases));
}

/// ||K(v) - K(w)||^2_{L2(U,H)} <= (2 L_G^2 / xi^2)(1 + ||w||_V^2) ||v - w||_H^2 with lambda = 0.1.
inline Check check_K_lipschitz(const PropertyOptions &opt, double lambda = 0.1,
                               std::vector<double> xis = {0.1, 0.05}) {
  CounterRng rng(opt.seed, 5);
  double worst = -std::numeric_limits<double>::infinity();
  int fails = 0, total = 0;
  for (double xi : xis) {
    for (int i = 0; i < opt.cases; ++i) {
      const GridPtr g = detail::case_grid(i);
      const NoiseModel model = opt.noise_for(g->dim());
      const RegularizedNoise reg{PotentialSpec{}, YosidaParams{lambda, 1e-12, 200}, ResolventParams{xi}};
      const int bw = detail::case_bandwidth(g);
      const SpectralField v = random_field(g, rng, bw, rng.uniform(0.05, 1.5), rng.uniform(-0.3, 0.3));
      const SpectralField w = random_field(g, rng, bw, rng.uniform(0.05, 1.5), rng.uniform(-0.3, 0.3));
      const double lhs = std::pow(K_lambda_xi_hs_distance(v, w, model, reg), 2);
      const double rhs =
          2.0 * model.lg2() / (xi * xi) * (1.0 + std::pow(sobolev_norm(w, 1.0), 2)) * std::pow(l2_norm(v - w), 2);
      const double m = (lhs - rhs) / rhs;
      ++total;
      if (m > detail::kRelSlack) ++fails;
      worst = std::max(worst, m);
    }
  }
  return detail::finish("K_lipschitz", fails == 0, worst, detail::kRelSlack,
                        fmt::format("{} of {} pairs violate (measured: max relative excess)", fails, total));
}

/// xi ||grad Laplacian R_xi f||^2 <= 1/2 ||Laplacian f||^2.
inline Check check_resolvent_estimate(const PropertyOptions &opt) {
  CounterRng rng(opt.seed, 6);
  double worst = -std::numeric_limits<double>::infinity();
  int fails = 0, total = 0;
  for (double xi : {1.0, 0.1, 0.01}) {
    for (int i = 0; i < opt.cases; ++i) {
      const GridPtr g = detail::case_grid(i);
      const SpectralField f = random_field(g, rng, detail::case_bandwidth(g), rng.uniform(0.1, 2.0));
      const SpectralField r = resolvent_Rxi(f, ResolventParams{xi});
      const auto &gr = *g;
      const double lhs = xi * weighted_spectral_sum(r, [&](std::size_t j) { return std::pow(gr.symbol(j), 3); });
      const double rhs = 0.5 * weighted_spectral_sum(f, [&](std::size_t j) { return std::pow(gr.symbol(j), 2); });
      const double m = (lhs - rhs) / rhs;
      ++total;
      if (m > detail::kRelSlack) ++fails;
      worst = std::max(worst, m);
    }
  }
  return detail::finish("resolvent_estimate", fails == 0, worst, detail::kRelSlack,
                        fmt::format("{} of {} fields violate (measured: max relative excess)", fails, total));
}

/// ||R_xi f||_{H^s} <= ||f||_{H^s} for s in {0, 1, 2}; the mean is preserved exactly.
inline Check check_resolvent_contraction(const PropertyOptions &opt) {
  CounterRng rng(opt.seed, 7);
  int fails = 0, total = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < opt.cases; ++i) {
    const GridPtr g = detail::case_grid(i);
    const SpectralField f = random_field(g, rng, detail::case_bandwidth(g), 1.0, rng.uniform(-1.0, 1.0));
    const SpectralField r = resolvent_Rxi(f, ResolventParams{rng.uniform(1e-3, 1.0)});
    for (double s : {0.0, 1.0, 2.0}) {
      const double m = sobolev_norm(r, s) / sobolev_norm(f, s) - 1.0;
      ++total;
      if (m > detail::kRelSlack) ++fails;
      worst = std::max(worst, m);
    }
    ++total;
    if (r.spectrum()[0] != f.spectrum()[0]) ++fails;
  }
  return detail::finish("resolvent_contraction", fails == 0, worst, detail::kRelSlack,
                        fmt::format("{} of {} comparisons violate", fails, total));
}

/// <A f, f> > 0 for nonconstant f, A c = 0, and N(A f) = f - mean f.
inline Check check_operator_pair(const PropertyOptions &opt) {
  CounterRng rng(opt.seed, 8);
  int fails = 0, total = 0;
  double worst = 0.0;
  for (int i = 0; i < opt.cases; ++i) {
    const GridPtr g = detail::case_grid(i);
    const MixedOperatorParams p{rng.uniform(0.0, 1.0), rng.uniform(0.01, 1.0)};
    const SpectralField f = random_field(g, rng, detail::case_bandwidth(g), 1.0, rng.uniform(-1.0, 1.0));
    const SpectralField af = apply_A(f, p);
    ++total;
    if (!(inner(af, f) > 0.0)) ++fails;
    ++total;
    if (max_abs(apply_A(SpectralField::constant(g, f.mean()), p)) != 0.0) ++fails;
    const SpectralField back = apply_N(af, p);
    const double err = max_abs(back - (f - SpectralField::constant(g, f.mean())));
    worst = std::max(worst, err);
    ++total;
    if (err > 1e-11) ++fails;
  }
  return detail::finish("operator_A_N", fails == 0, worst, 1e-11,
                        fmt::format("{} of {} checks fail (measured: max |N A f - (f - mean f)|)", fails, total));
}

/// Yosida properties: resolvent residual, Psi_lambda(0) = Psi'_lambda(0) = 0,
/// convexity, Psi_lambda <= Psi with monotone convergence in lambda,
/// 1-Lipschitz J_lambda, (1/lambda)-Lipschitz Psi'_lambda, and
/// Psi'_lambda = Psi'(J_lambda).
inline Check check_yosida_properties(const PropertyOptions &opt) {
  CounterRng rng(opt.seed, 9);
  const PotentialSpec spec;
  int fails = 0, total = 0;
  std::string first;
  auto expect = [&](bool ok, const std::string &what) {
    ++total;
    if (!ok) {
      if (fails == 0) first = what;
      ++fails;
    }
  };
  const std::vector<double> lambdas{1e-1, 1e-2, 1e-3};
  double worst_residual = 0.0;
  for (double lam : lambdas) {
    const YosidaParams yp{lam, 1e-12, 200};
    expect(yosida_value(spec, yp, 0.0) == 0.0 && yosida_prime(spec, yp, 0.0) == 0.0, "zero at origin");
    for (int i = 0; i <= 2000; ++i) {
      const double s = -10.0 + 0.01 * i;
      // J is carried as (value, Psi'(J)/theta); near |J| = 1 the value alone rounds to +-1.
      const ResolventPoint r = resolve(spec, yp, s);
      const double res = std::abs(r.value + lam * spec.theta * r.log_ratio - s);
      worst_residual = std::max(worst_residual, res);
      expect(res <= 1e-10, fmt::format("residual at s={} lambda={}", s, lam));
      const double d1 = yosida_prime(spec, yp, s);
      expect(std::abs(d1 - (s - r.value) / lam) <= 1e-8 * std::max(1.0, std::abs(d1)),
             fmt::format("difference quotient at s={}", s));
      if (1.0 - std::abs(r.value) > 1e-6) {
        expect(std::abs(d1 - psi_prime(spec, r.value)) <= 1e-8 * std::max(1.0, std::abs(d1)),
               fmt::format("derivative consistency at s={}", s));
      }
    }
    for (int i = 0; i < opt.cases; ++i) {
      const double a = rng.uniform(-3.0, 3.0);
      const double b = rng.uniform(-3.0, 3.0);
      const double mid = yosida_value(spec, yp, 0.5 * (a + b));
      const double avg = 0.5 * (yosida_value(spec, yp, a) + yosida_value(spec, yp, b));
      expect(mid <= avg + 1e-12 * std::max(1.0, std::abs(avg)), fmt::format("convexity at {} {}", a, b));
      expect(std::abs(resolvent_J(spec, yp, a) - resolvent_J(spec, yp, b)) <= std::abs(a - b) * (1.0 + 1e-12),
             "J 1-Lipschitz");
      expect(std::abs(yosida_prime(spec, yp, a) - yosida_prime(spec, yp, b)) <=
                 std::abs(a - b) / lam * (1.0 + 1e-9) + 1e-12,
             "Psi' Lipschitz 1/lambda");
    }
  }
  for (int i = 0; i < opt.cases; ++i) {
    const double s = rng.uniform(-0.999, 0.999);
    double prev_v = -1.0, prev_d = -1.0;
    for (double lam : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
      const YosidaParams yp{lam, 1e-12, 200};
      const double v = yosida_value(spec, yp, s);
      const double d = std::abs(yosida_prime(spec, yp, s));
      expect(v <= psi(spec, s) + 1e-12, fmt::format("Psi_lambda <= Psi at s={}", s));
      expect(v >= prev_v - 1e-14 && d >= prev_d - 1e-12, fmt::format("monotone in lambda at s={}", s));
      prev_v = v;
      prev_d = d;
    }
  }
  return detail::finish("yosida_properties", fails == 0, worst_residual, 1e-10,
                        fails ? fmt::format("{} of {} checks fail; first: {}", fails, total, first)
                              : fmt::format("{} checks (measured: max resolvent residual)", total));
}

/// Psi_lambda(s) >= s^2/M - M on s in [-10, 10], lambda in (0, 1): M reported.
inline Check check_quadratic_lower_bound(const PropertyOptions &) {
  std::vector<double> lams, ss;
  for (int i = 0; i < 40; ++i) lams.push_back(std::pow(10.0, -6.0 + 6.0 * i / 40.0) * 0.999);
  for (int i = 0; i <= 400; ++i) ss.push_back(-10.0 + 0.05 * i);
  const PotentialSpec spec;
  const double m = quadratic_lower_bound_constant(spec, lams, ss);
  bool ok = std::isfinite(m) && m > 0.0;
  for (double lam : lams) {
    for (double s : ss) ok = ok && yosida_value(spec, YosidaParams{lam, 1e-12, 200}, s) >= s * s / m - m - 1e-12;
  }
  return detail::finish("yosida_quadratic_lower_bound", ok, m, std::numeric_limits<double>::quiet_NaN(),
                        "empirical M (measured) over the sampled (s, lambda) set");
}

/// mean(div g_k(phi)) == 0 bit-exactly for every mode.
inline Check check_divG_mass_exact(const PropertyOptions &opt) {
  CounterRng rng(opt.seed, 10);
  int fails = 0, total = 0;
  for (int i = 0; i < opt.cases; ++i) {
    const GridPtr g = detail::case_grid(i);
    const NoiseModel model = opt.noise_for(g->dim());
    const SpectralField v = random_field(g, rng, detail::case_bandwidth(g), rng.uniform(0.05, 0.9),
                                         rng.uniform(-0.1, 0.1));
    for (const auto &d : div_G_apply(v, model)) {
      ++total;
      if (d.spectrum()[0] != Complex(0.0, 0.0)) ++fails;
    }
  }
  return detail::finish("divG_mass_exact", fails == 0, static_cast<double>(fails), 0.0,
                        fmt::format("{} of {} outputs with nonzero mean", fails, total));
}

/// Sum_k ||grad div g_k||^2 <= 2 L_G^2 (||phi||_{H^2}^2 + ||phi||_{W^{1,4}}^4) on |phi| <= 1.
inline Check check_grad_divG_bound(const PropertyOptions &opt) {
  CounterRng rng(opt.seed, 11);
  int fails = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < opt.cases; ++i) {
    const GridPtr g = detail::case_grid(i);
    const NoiseModel model = opt.noise_for(g->dim());
    const SpectralField v = random_field(g, rng, detail::case_bandwidth(g), rng.uniform(0.05, 1.0));
    const double lhs = std::pow(grad_div_G_hs_norm(v, model), 2);
    double grad4 = 0.0;
    {
      std::vector<double> mag(v.size(), 0.0);
      for (int a = 0; a < g->dim(); ++a) {
        const SpectralField pv = partial(v, a);
        const auto da = pv.values();
        for (std::size_t j = 0; j < mag.size(); ++j) mag[j] += da[j] * da[j];
      }
      for (double m2 : mag) grad4 += m2 * m2;
      grad4 /= static_cast<double>(mag.size());
    }
    const double w14 = std::pow(lp_norm(v, 4.0), 4) + grad4;
    const double rhs = 2.0 * model.lg2() * (std::pow(sobolev_norm(v, 2.0), 2) + w14);
    const double m = (lhs - rhs) / rhs;
    if (m > detail::kRelSlack) ++fails;
    worst = std::max(worst, m);
  }
  return detail::finish("grad_divG_bound", fails == 0, worst, detail::kRelSlack,
                        fmt::format("{} of {} fields violate (measured: max relative excess)", fails, opt.cases));
}

/// Reported L_G^2 grows with K and its increments shrink under K-doubling.
inline Check check_lg2_truncation(const PropertyOptions &) {
  const NoiseShape shape;
  auto lg2 = [&](int k) { return NoiseModel(1, k, 1.0, 1.0, shape).lg2(); };
  const double a = lg2(16), b = lg2(32), c = lg2(64), d = lg2(128);
  const bool ok = a < b && b < c && c < d && (c - b) < (b - a) && (d - c) < (c - b);
  return detail::finish("lg2_truncation_tail", ok, d - c, b - a, "measured: last increment; bound: first increment");
}

/// <A_lambda v - A_lambda w, v - w> >= -c1 ||v - w||^2 with
/// c1 = [beta + (alpha/2)(1/lambda + C_R)](1/lambda + C_R).
inline Check check_weak_monotonicity(const PropertyOptions &opt) {
  CounterRng rng(opt.seed, 12);
  const PotentialSpec spec;
  const double cr = spec.regular_lipschitz();
  int fails = 0, total = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (double lam : {1e-1, 1e-2}) {
    const Potential pot{spec, YosidaParams{lam, 1e-12, 200}, PotentialMode::yosida};
    for (int i = 0; i < opt.cases; ++i) {
      const GridPtr g = detail::case_grid(i);
      const MixedOperatorParams p{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
      const int bw = detail::case_bandwidth(g);
      const SpectralField v = random_field(g, rng, bw, rng.uniform(0.1, 1.5), rng.uniform(-0.5, 0.5));
      const SpectralField w = random_field(g, rng, bw, rng.uniform(0.1, 1.5), rng.uniform(-0.5, 0.5));
      const SpectralField d = v - w;
      auto pair = [&](const SpectralField &u) {
        SpectralField mu = f_prime_field(u, pot);
        mu -= laplacian(u);
        const SpectralField dev = mu - SpectralField::constant(g, mu.mean());
        return p.alpha * inner(mu, -1.0 * laplacian(d)) + p.beta * inner(dev, d);
      };
      const double lhs = pair(v) - pair(w);
      const double c1 = (p.beta + 0.5 * p.alpha * (1.0 / lam + cr)) * (1.0 / lam + cr);
      const double rhs = -c1 * std::pow(l2_norm(d), 2);
      const double m = (rhs - lhs) / (std::abs(rhs) + 1e-300);
      ++total;
      if (m > 1e-10) ++fails;
      worst = std::max(worst, m);
    }
  }
  return detail::finish("A_lambda_weak_monotonicity", fails == 0, worst, 1e-10,
                        fmt::format("{} of {} pairs violate", fails, total));
}

/// Every property check with fresh random inputs drawn from `opt.seed`.
inline ExperimentReport run_property_suite(const PropertyOptions &opt = {}) {
  ExperimentReport rep;
  rep.kind = "property_suite";
  rep.columns = {"id", "status", "measured", "bound", "seed", "detail"};
  const std::vector<std::function<Check(const PropertyOptions &)>> all{
      check_star_norm_sandwich,       check_sharp_sandwich,       check_divG_lipschitz_v0star,
      check_divG_local_lipschitz,  [](const PropertyOptions &o) { return check_K_lipschitz(o); },
      check_resolvent_estimate,    check_resolvent_contraction, check_operator_pair,
      check_yosida_properties,     check_quadratic_lower_bound, check_divG_mass_exact,
      check_grad_divG_bound,       check_lg2_truncation,        check_weak_monotonicity};
  for (const auto &fn : all) {
    Check c;
    try {
      c = fn(opt);
    } catch (const std::exception &e) {
      c.id = "exception";
      c.passed = false;
      c.detail = e.what();
    }
    rep.rows.push_back({c.id, c.passed ? "PASS" : "FAIL", fmt_num(c.measured), fmt_num(c.bound),
                        std::to_string(opt.seed), "\"" + c.detail + "\""});
    rep.checks.push_back(std::move(c));
  }
  rep.details["seed"] = opt.seed;
  rep.details["cases"] = opt.cases;
  rep.details["sandwich_fields"] = opt.sandwich_fields;
  return rep;
}

} // namespace schac
