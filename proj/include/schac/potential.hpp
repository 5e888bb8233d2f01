#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include "schac/errors.hpp"
#include "schac/grid.hpp"

namespace schac {

/// Flory-Huggins parameters:
///   F(s) = theta [(1+s) ln(1+s) + (1-s) ln(1-s)] - theta0 s^2,  0 < theta < theta0.
/// `offset` is added to F only when reporting energies.
struct PotentialSpec {
  double theta = 1.0;
  double theta0 = 2.0;
  double offset = 2.0;

  void validate() const {
    if (!(theta > 0.0 && theta < theta0)) throw ContractViolation("PotentialSpec: need 0 < theta < theta0");
    if (!(offset >= theta0)) throw ContractViolation("PotentialSpec: offset must be >= theta0");
  }

  /// Lipschitz constant of R'.
  double regular_lipschitz() const noexcept { return 2.0 * theta0; }
};

struct YosidaParams {
  double lambda = 1e-2;
  double newton_tol = 1e-12;
  int newton_max_iter = 200;

  void validate() const {
    if (!(lambda > 0.0)) throw ContractViolation("YosidaParams: lambda must be positive");
    if (!(newton_tol > 0.0 && newton_tol <= 1e-10)) {
      throw ContractViolation("YosidaParams: newton_tol must lie in (0, 1e-10]");
    }
    if (newton_max_iter < 1) throw ContractViolation("YosidaParams: newton_max_iter must be >= 1");
  }
};

// Singular part Psi and its derivatives.

inline double psi(const PotentialSpec &spec, double s) {
  if (!(std::abs(s) <= 1.0)) throw DomainError("psi: argument outside [-1, 1]", 0, s);
  // (1 -+ s) ln(1 -+ s) -> 0 at the endpoints.
  const double a = (s == -1.0) ? 0.0 : (1.0 + s) * std::log1p(s);
  const double b = (s == 1.0) ? 0.0 : (1.0 - s) * std::log1p(-s);
  return spec.theta * (a + b);
}

inline double psi_prime(const PotentialSpec &spec, double s) {
  if (!(std::abs(s) < 1.0)) throw DomainError("psi_prime: argument outside (-1, 1)", 0, s);
  return spec.theta * (std::log1p(s) - std::log1p(-s));
}

inline double psi_second(const PotentialSpec &spec, double s) {
  if (!(std::abs(s) < 1.0)) throw DomainError("psi_second: argument outside (-1, 1)", 0, s);
  return 2.0 * spec.theta / ((1.0 - s) * (1.0 + s));
}

inline double regular_part(const PotentialSpec &spec, double s) { return -spec.theta0 * s * s; }
inline double regular_prime(const PotentialSpec &spec, double s) { return -2.0 * spec.theta0 * s; }

// Yosida regularization.
//
// The resolvent r = J_lambda(s) solves r + lambda Psi'(r) = s. It is solved
// for y = ln((1+r)/(1-r)) = Psi'(r)/theta instead of r itself: for small
// lambda and |s| > 1 the root sits within e^{-(|s|-1)/(lambda theta)} of +-1,
// which is not representable as r but is harmless as y. In terms of y the
// equation reads tanh(y/2) + lambda theta y = s, with the bracket
// y in [(s-1)/(lambda theta), (s+1)/(lambda theta)].

struct ResolventPoint {
  double value;     ///< J_lambda(s), kept inside the open interval (-1, 1)
  double log_ratio; ///< y = Psi'(J_lambda(s)) / theta
  double residual;  ///< |J + lambda Psi'(J) - s|
};

inline ResolventPoint resolve(const PotentialSpec &spec, const YosidaParams &params, double s) {
  const double c = params.lambda * spec.theta;
  if (!(c > 0.0)) throw ContractViolation("resolvent: lambda must be positive");
  if (!std::isfinite(s)) throw NumericalError("resolvent: non-finite argument", s, params.lambda, s);
  const double tol = std::max(params.newton_tol, 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(s)));
  auto g = [&](double y) { return std::tanh(0.5 * y) + c * y - s; };

  double lo = (s - 1.0) / c;
  double hi = (s + 1.0) / c;
  constexpr double eps = 1e-9;
  const double r0 = std::clamp(s, -1.0 + eps, 1.0 - eps);
  double y = std::clamp(2.0 * std::atanh(r0), lo, hi);
  double gy = g(y);
  int it = 0;
  for (; it < params.newton_max_iter && std::abs(gy) > tol; ++it) {
    if (gy > 0.0) hi = y; else lo = y;
    const double ch = std::cosh(0.5 * y);
    const double dg = 0.5 / (ch * ch) + c;
    double next = y - gy / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == y) break;
    y = next;
    gy = g(y);
  }
  if (!(std::abs(gy) <= tol)) {
    throw NumericalError("resolvent: Newton iteration did not converge (s=" + std::to_string(s) +
                             ", lambda=" + std::to_string(params.lambda) + ")",
                         s, params.lambda, std::abs(gy));
  }
  double r = std::tanh(0.5 * y);
  r = std::clamp(r, std::nextafter(-1.0, 0.0), std::nextafter(1.0, 0.0));
  return {r, y, std::abs(gy)};
}

inline double resolvent_J(const PotentialSpec &spec, const YosidaParams &params, double s) {
  return resolve(spec, params, s).value;
}

/// Psi'_lambda(s) = (s - J_lambda(s)) / lambda = Psi'(J_lambda(s)).
inline double yosida_prime(const PotentialSpec &spec, const YosidaParams &params, double s) {
  return spec.theta * resolve(spec, params, s).log_ratio;
}

/// Psi''_lambda(s) = Psi''(J) / (1 + lambda Psi''(J)).
inline double yosida_second(const PotentialSpec &spec, const YosidaParams &params, double s) {
  const double y = resolve(spec, params, s).log_ratio;
  const double ch = std::cosh(0.5 * y);
  return 1.0 / (params.lambda + 1.0 / (2.0 * spec.theta * ch * ch));
}

namespace detail {
/// Psi(J) written through y so it stays accurate when J is within rounding of +-1.
inline double psi_from_log_ratio(double theta, double y) {
  const double a = std::abs(y);
  const double e = std::exp(-a);
  const double one_minus_r = 2.0 * e / (1.0 + e);
  return theta * (2.0 * std::numbers::ln2 - 2.0 * std::log1p(e) - one_minus_r * a);
}
} // namespace detail

/// Moreau envelope Psi_lambda(s) = Psi(J) + (s - J)^2 / (2 lambda); finite on all of R.
inline double yosida_value(const PotentialSpec &spec, const YosidaParams &params, double s) {
  const ResolventPoint p = resolve(spec, params, s);
  const double gap = params.lambda * spec.theta * p.log_ratio; // s - J up to the residual
  return detail::psi_from_log_ratio(spec.theta, p.log_ratio) + gap * gap / (2.0 * params.lambda);
}

enum class PotentialMode { exact, yosida };

inline PotentialMode parse_potential_mode(const std::string &s) {
  if (s == "exact") return PotentialMode::exact;
  if (s == "yosida") return PotentialMode::yosida;
  throw ConfigError("unknown potential mode '" + s + "' (expected exact|yosida)");
}

inline const char *to_string(PotentialMode m) { return m == PotentialMode::exact ? "exact" : "yosida"; }

/// Margin kept from +-1 when the exact logarithmic derivative is evaluated.
inline constexpr double kExactSafety = 1e-8;

/// Potential bundle used by the dynamics: F = Psi + R with Psi either exact or
/// replaced by its Yosida approximation.
struct Potential {
  PotentialSpec spec;
  YosidaParams yosida;
  PotentialMode mode = PotentialMode::yosida;

  double f_prime(double s) const {
    if (mode == PotentialMode::exact) {
      if (!(std::abs(s) <= 1.0 - kExactSafety)) {
        throw DomainError("exact potential: |phi| exceeds 1 - 1e-8", 0, s);
      }
      return psi_prime(spec, s) + regular_prime(spec, s);
    }
    return yosida_prime(spec, yosida, s) + regular_prime(spec, s);
  }

  /// F(s) (exact: needs |s| <= 1) or F_lambda(s), without the energy offset.
  double f_value(double s) const {
    if (mode == PotentialMode::exact) return psi(spec, s) + regular_part(spec, s);
    return yosida_value(spec, yosida, s) + regular_part(spec, s);
  }
};

/// F'_lambda = Psi'_lambda + R' evaluated pointwise with dealiasing.
inline SpectralField f_prime_lambda(const SpectralField &field, const PotentialSpec &spec,
                                    const YosidaParams &params) {
  return dealiased_map(field, [&](double s) { return yosida_prime(spec, params, s) + regular_prime(spec, s); });
}

/// F' in the selected mode, dealiased.
inline SpectralField f_prime_field(const SpectralField &field, const Potential &pot) {
  return dealiased_map(field, [&](double s) { return pot.f_prime(s); });
}

/// Smallest M with Psi_lambda(s) >= s^2/M - M at every sampled (s, lambda).
/// For fixed (s, lambda) the admissible M form [M*, inf) with
/// M* = (-Psi_lambda(s) + sqrt(Psi_lambda(s)^2 + 4 s^2)) / 2.
inline double quadratic_lower_bound_constant(const PotentialSpec &spec, std::span<const double> lambdas,
                                             std::span<const double> samples) {
  double m = 0.0;
  for (double lam : lambdas) {
    YosidaParams p;
    p.lambda = lam;
    for (double s : samples) {
      const double v = yosida_value(spec, p, s);
      m = std::max(m, 0.5 * (-v + std::sqrt(v * v + 4.0 * s * s)));
    }
  }
  return m;
}

} // namespace schac
