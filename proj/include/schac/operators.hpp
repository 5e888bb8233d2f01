#pragma once

#include <cmath>
#include <functional>

#include "schac/errors.hpp"
#include "schac/grid.hpp"

namespace schac {

/// Weights of the mixed operator A = alpha (-Laplacian) + beta (I - mean).
struct MixedOperatorParams {
  double alpha = 1.0;
  double beta = 0.0;

  void validate() const {
    if (!(alpha >= 0.0)) throw ContractViolation("MixedOperatorParams: alpha must be >= 0");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ContractViolation("MixedOperatorParams: beta must lie in [0, 1]");
    if (!(alpha + beta > 0.0)) throw ContractViolation("MixedOperatorParams: alpha + beta must be > 0");
  }

  /// Symbol a(k) = alpha |2 pi k|^2 + beta on a nonzero mode.
  double symbol(double q) const noexcept { return alpha * q + beta; }
};

struct ResolventParams {
  double xi = 0.1;

  void validate() const {
    if (!(xi > 0.0)) throw ContractViolation("ResolventParams: xi must be positive");
  }
};

/// Tolerance on |mean| for inputs that must be zero-mean.
inline constexpr double kZeroMeanTol = 1e-12;

inline void require_zero_mean(const SpectralField &v, const char *who) {
  if (!(std::abs(v.mean()) <= kZeroMeanTol)) {
    throw ContractViolation(std::string(who) + ": input must have zero mean (mean = " + std::to_string(v.mean()) + ")");
  }
}

/// A applied as a Fourier multiplier; constants are annihilated.
inline SpectralField apply_A(const SpectralField &f, const MixedOperatorParams &p) {
  p.validate();
  const auto &g = *f.grid();
  return apply_multiplier(f, [&](std::size_t i) { return i == 0 ? 0.0 : p.symbol(g.symbol(i)); });
}

/// Zero-mean inverse of A.
inline SpectralField apply_N(const SpectralField &f, const MixedOperatorParams &p) {
  p.validate();
  require_zero_mean(f, "apply_N");
  const auto &g = *f.grid();
  return apply_multiplier(f, [&](std::size_t i) { return i == 0 ? 0.0 : 1.0 / p.symbol(g.symbol(i)); });
}

/// Per-mode weight of ||v||_*^2 = ||grad N v||^2: |2 pi k|^2 / a(k)^2.
using StarWeight = std::function<double(const TorusGrid &, std::size_t, const MixedOperatorParams &)>;

inline double default_star_weight(const TorusGrid &g, std::size_t i, const MixedOperatorParams &p) {
  if (i == 0) return 0.0;
  const double q = g.symbol(i);
  const double a = p.symbol(q);
  return q / (a * a);
}

inline double dual_norm_star(const SpectralField &v, const MixedOperatorParams &p,
                             const StarWeight &weight = default_star_weight) {
  p.validate();
  require_zero_mean(v, "dual_norm_star");
  const auto &g = *v.grid();
  return std::sqrt(weighted_spectral_sum(v, [&](std::size_t i) { return weight(g, i, p); }));
}

/// (||v - mean v||_*^2 + mean(v)^2)^(1/2); defined for any v.
inline double dual_norm_sharp(const SpectralField &v, const MixedOperatorParams &p) {
  p.validate();
  if (!(p.alpha > 0.0)) throw ContractViolation("dual_norm_sharp: alpha must be positive");
  const auto &g = *v.grid();
  const double star2 = weighted_spectral_sum(v, [&](std::size_t i) { return default_star_weight(g, i, p); });
  const double m = v.mean();
  return std::sqrt(star2 + m * m);
}

/// ||v||_{V_0^*} through the Riesz map -Laplacian on zero-mean fields:
/// (sum_{k != 0} |v_k|^2 / |2 pi k|^2)^(1/2).
inline double v0_dual_norm(const SpectralField &v) {
  const auto &g = *v.grid();
  return std::sqrt(weighted_spectral_sum(v, [&](std::size_t i) { return i == 0 ? 0.0 : 1.0 / g.symbol(i); }));
}

/// ||v||_{V^*} = H^{-1} norm, dual to the full H^1 norm.
inline double v_dual_norm(const SpectralField &v) { return sobolev_norm(v, -1.0); }

/// R_xi = (I - xi Laplacian)^{-1}; preserves the mean exactly.
inline SpectralField resolvent_Rxi(const SpectralField &f, const ResolventParams &p) {
  p.validate();
  const auto &g = *f.grid();
  return apply_multiplier(f, [&](std::size_t i) { return 1.0 / (1.0 + p.xi * g.symbol(i)); });
}

} // namespace schac
