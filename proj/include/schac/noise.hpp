#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "schac/errors.hpp"
#include "schac/grid.hpp"
#include "schac/operators.hpp"
#include "schac/potential.hpp"

namespace schac {

/// h(s) = (1 - s^2)^2. Vanishes with its derivative at s = +-1.
struct QuarticShape {
  double value(double s) const { return (1.0 - s * s) * (1.0 - s * s); }
  double first(double s) const { return -4.0 * s * (1.0 - s * s); }
  double second(double s) const { return 12.0 * s * s - 4.0; }
  double sup_value() const { return 1.0; }
  double sup_first() const { return 8.0 / (3.0 * std::sqrt(3.0)); }
  double sup_second() const { return 8.0; }
};

/// Natural cubic spline through tabulated (s_i, h_i) with s_0 = -1 and
/// s_n = 1. Piecewise cubic with continuous second derivative, so h is in
/// W^{2,infinity}(-1, 1) and its sup norms are computed exactly per piece.
class TabulatedShape {
public:
  TabulatedShape(std::vector<double> knots, std::vector<double> values)
      : s_(std::move(knots)), h_(std::move(values)) {
    const std::size_t n = s_.size();
    if (n < 3 || h_.size() != n) throw ConfigError("tabulated noise shape: need >= 3 knots with matching values");
    if (s_.front() != -1.0 || s_.back() != 1.0) throw ConfigError("tabulated noise shape: knots must span [-1, 1]");
    for (std::size_t i = 1; i < n; ++i) {
      if (!(s_[i] > s_[i - 1])) throw ConfigError("tabulated noise shape: knots must increase strictly");
    }
    // Tridiagonal system for the second derivatives, natural end conditions.
    m_.assign(n, 0.0);
    std::vector<double> diag(n, 1.0), upper(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hl = s_[i] - s_[i - 1];
      const double hr = s_[i + 1] - s_[i];
      const double lower = hl / 6.0;
      diag[i] = (hl + hr) / 3.0;
      upper[i] = hr / 6.0;
      rhs[i] = (h_[i + 1] - h_[i]) / hr - (h_[i] - h_[i - 1]) / hl;
      // forward elimination against row i-1
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    }
    compute_sups();
  }

  double value(double s) const {
    const auto [i, a, b, w] = locate(s);
    return a * h_[i] + b * h_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * w * w / 6.0;
  }
  double first(double s) const {
    const auto [i, a, b, w] = locate(s);
    return (h_[i + 1] - h_[i]) / w - (3.0 * a * a - 1.0) * w * m_[i] / 6.0 + (3.0 * b * b - 1.0) * w * m_[i + 1] / 6.0;
  }
  double second(double s) const {
    const auto [i, a, b, w] = locate(s);
    return a * m_[i] + b * m_[i + 1];
  }
  double sup_value() const { return sup_[0]; }
  double sup_first() const { return sup_[1]; }
  double sup_second() const { return sup_[2]; }

  const std::vector<double> &knots() const { return s_; }
  const std::vector<double> &values() const { return h_; }

private:
  struct Piece {
    std::size_t i;
    double a, b, w;
  };

  Piece locate(double s) const {
    if (!(std::abs(s) <= 1.0)) throw DomainError("noise shape: argument outside [-1, 1]", 0, s);
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t i = (it == s_.begin()) ? 0 : static_cast<std::size_t>(it - s_.begin()) - 1;
    i = std::min(i, s_.size() - 2);
    const double w = s_[i + 1] - s_[i];
    const double b = (s - s_[i]) / w;
    return {i, 1.0 - b, b, w};
  }

  void compute_sups() {
    sup_ = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i + 1 < s_.size(); ++i) {
      const double lo = s_[i], hi = s_[i + 1];
      // candidate points: piece ends, zero of h'' (extremum of h'), zeros of h' (extrema of h)
      std::vector<double> cand{lo, hi};
      const double m0 = m_[i], m1 = m_[i + 1];
      if (m0 != m1) {
        const double t = m0 / (m0 - m1);
        if (t > 0.0 && t < 1.0) cand.push_back(lo + t * (hi - lo));
      }
      // h' on the piece is a quadratic in b; find its roots numerically by sign scan + bisection.
      constexpr int kScan = 64;
      double prev_x = lo, prev_v = first(lo);
      for (int j = 1; j <= kScan; ++j) {
        const double x = lo + (hi - lo) * j / kScan;
        const double v = first(x);
        if ((prev_v < 0.0) != (v < 0.0)) {
          double a = prev_x, b = x, fa = prev_v;
          for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (a + b);
            const double fm = first(mid);
            if ((fa < 0.0) == (fm < 0.0)) { a = mid; fa = fm; } else { b = mid; }
          }
          cand.push_back(0.5 * (a + b));
        }
        prev_x = x;
        prev_v = v;
      }
      for (double x : cand) {
        sup_[0] = std::max(sup_[0], std::abs(value(x)));
        sup_[1] = std::max(sup_[1], std::abs(first(x)));
        sup_[2] = std::max(sup_[2], std::abs(second(x)));
      }
    }
  }

  std::vector<double> s_, h_, m_;
  std::array<double, 3> sup_{};
};

/// Scalar profile h of the noise coefficients g_k(s) = c_k h(s) e_{axis(k)}.
class NoiseShape {
public:
  NoiseShape() : impl_(QuarticShape{}) {}
  explicit NoiseShape(QuarticShape q) : impl_(q) {}
  explicit NoiseShape(TabulatedShape t) : impl_(std::move(t)) {}

  double value(double s) const { return std::visit([&](const auto &h) { return h.value(s); }, impl_); }
  double first(double s) const { return std::visit([&](const auto &h) { return h.first(s); }, impl_); }
  double second(double s) const { return std::visit([&](const auto &h) { return h.second(s); }, impl_); }
  double sup_first() const { return std::visit([](const auto &h) { return h.sup_first(); }, impl_); }
  double sup_second() const { return std::visit([](const auto &h) { return h.sup_second(); }, impl_); }

  /// ||h||_{W^{2,inf}(-1,1)} = max(sup|h|, sup|h'|, sup|h''|).
  double w2inf_norm() const {
    return std::visit([](const auto &h) { return std::max({h.sup_value(), h.sup_first(), h.sup_second()}); }, impl_);
  }

  bool is_quartic() const { return std::holds_alternative<QuarticShape>(impl_); }
  const TabulatedShape *table() const { return std::get_if<TabulatedShape>(&impl_); }

private:
  std::variant<QuarticShape, TabulatedShape> impl_;
};

/// Truncated coefficient family g_k(s) = c0 k^{-r} h(s) e_{(k-1) mod d},
/// k = 1..K, driven by K independent Brownian motions.
class NoiseModel {
public:
  NoiseModel() = default;
  NoiseModel(int dim, int num_modes, double amplitude, double decay, NoiseShape shape = {})
      : dim_(dim), num_modes_(num_modes), amplitude_(amplitude), decay_(decay), shape_(std::move(shape)) {
    if (dim < 1 || dim > 3) throw ContractViolation("NoiseModel: dim must be 1, 2 or 3");
    if (num_modes < 0) throw ContractViolation("NoiseModel: num_modes must be >= 0");
    if (!(amplitude >= 0.0)) throw ContractViolation("NoiseModel: amplitude must be >= 0");
    if (!(decay > 0.5)) throw ContractViolation("NoiseModel: decay must exceed 1/2");
  }

  /// Amplitude c0 for which the truncated family has the requested L_G^2.
  static double amplitude_for(double lg2, int num_modes, double decay, const NoiseShape &shape) {
    double sum = 0.0;
    for (int k = 1; k <= num_modes; ++k) sum += std::pow(static_cast<double>(k), -2.0 * decay);
    const double w = shape.w2inf_norm();
    return std::sqrt(lg2 / (sum * w * w));
  }

  int dim() const noexcept { return dim_; }
  int num_modes() const noexcept { return num_modes_; }
  double amplitude() const noexcept { return amplitude_; }
  double decay() const noexcept { return decay_; }
  const NoiseShape &shape() const noexcept { return shape_; }
  bool active() const noexcept { return num_modes_ > 0 && amplitude_ > 0.0; }

  /// c_k, 1-based.
  double coefficient(int k) const { return amplitude_ * std::pow(static_cast<double>(k), -decay_); }
  /// Direction axis of g_k, 1-based k.
  int axis(int k) const { return (k - 1) % dim_; }

  /// L_G^2 = sum_k ||g_k||^2_{W^{2,inf}}, exact for the truncated family.
  double lg2() const {
    double sum = 0.0;
    for (int k = 1; k <= num_modes_; ++k) sum += coefficient(k) * coefficient(k);
    const double w = shape_.w2inf_norm();
    return sum * w * w;
  }
  double lg() const { return std::sqrt(lg2()); }

  /// Smallness condition of the 1-d Allen-Cahn uniqueness result: L_G^2 < 1/2.
  bool allen_cahn_uniqueness_small() const { return lg2() < 0.5; }
  /// Noise threshold of the vanishing-viscosity argument: L_G <= sqrt(2).
  bool vanishing_viscosity_small() const { return lg() <= std::sqrt(2.0); }

  /// Weights per axis: w_a = sum_{k : axis(k) = a} c_k dW_k.
  std::vector<double> axis_weights(std::span<const double> dw) const {
    if (static_cast<int>(dw.size()) != num_modes_) throw ContractViolation("NoiseModel: increment count mismatch");
    std::vector<double> w(dim_, 0.0);
    for (int k = 1; k <= num_modes_; ++k) w[axis(k)] += coefficient(k) * dw[k - 1];
    return w;
  }

private:
  int dim_ = 1;
  int num_modes_ = 0;
  double amplitude_ = 0.0;
  double decay_ = 1.0;
  NoiseShape shape_;
};

enum class DualSpace { H, V0star };

namespace detail {
inline void require_unit_ball(const SpectralField &phi, const char *who) {
  const auto v = phi.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(std::abs(v[i]) <= 1.0)) {
      throw DomainError(std::string(who) + ": |phi| > 1 at grid index " + std::to_string(i), i, v[i]);
    }
  }
}

/// d_a h(phi) for every axis a that carries at least one mode.
inline std::vector<SpectralField> divergence_per_axis(const SpectralField &phi, const NoiseModel &model) {
  require_unit_ball(phi, "div_G");
  const SpectralField h = dealiased_map(phi, [&](double s) { return model.shape().value(s); });
  std::vector<SpectralField> out;
  const int used = std::min(model.dim(), std::max(model.num_modes(), 0));
  for (int a = 0; a < used; ++a) out.push_back(partial(h, a));
  return out;
}

inline std::vector<SpectralField> expand_modes(const std::vector<SpectralField> &per_axis, const NoiseModel &model) {
  std::vector<SpectralField> out;
  out.reserve(model.num_modes());
  for (int k = 1; k <= model.num_modes(); ++k) out.push_back(model.coefficient(k) * per_axis[model.axis(k)]);
  return out;
}

inline SpectralField combine(const std::vector<SpectralField> &per_axis, const NoiseModel &model,
                             std::span<const double> dw, const GridPtr &grid) {
  const auto w = model.axis_weights(dw);
  SpectralField acc = SpectralField::zeros(grid);
  for (std::size_t a = 0; a < per_axis.size(); ++a) acc.axpy(w[a], per_axis[a]);
  return acc;
}
} // namespace detail

/// Strong divergence noise div g_k(phi), k = 1..K, as spectral divergences
/// of g_k(phi). Every output has zero mean bit-exactly.
inline std::vector<SpectralField> div_G_apply(const SpectralField &phi, const NoiseModel &model) {
  return detail::expand_modes(detail::divergence_per_axis(phi, model), model);
}

/// sum_k div g_k(phi) dW_k.
inline SpectralField div_G_increment(const SpectralField &phi, const NoiseModel &model, std::span<const double> dw) {
  return detail::combine(detail::divergence_per_axis(phi, model), model, dw, phi.grid());
}

/// Hilbert-Schmidt norm (sum_k ||div g_k(phi)||^2)^(1/2) in H or V_0^*.
inline double div_G_hs_norm(const SpectralField &phi, const NoiseModel &model, DualSpace space) {
  const auto per_axis = detail::divergence_per_axis(phi, model);
  const MixedOperatorParams riesz{1.0, 0.0};
  double acc = 0.0;
  for (int k = 1; k <= model.num_modes(); ++k) {
    const auto &d = per_axis[model.axis(k)];
    const double n = space == DualSpace::H ? l2_norm(d) : dual_norm_star(d, riesz);
    acc += std::pow(model.coefficient(k) * n, 2);
  }
  return std::sqrt(acc);
}

/// HS distance between div G(v) and div G(w).
inline double div_G_hs_distance(const SpectralField &v, const SpectralField &w, const NoiseModel &model,
                                DualSpace space) {
  const auto pv = detail::divergence_per_axis(v, model);
  const auto pw = detail::divergence_per_axis(w, model);
  const MixedOperatorParams riesz{1.0, 0.0};
  double acc = 0.0;
  for (int k = 1; k <= model.num_modes(); ++k) {
    const SpectralField d = pv[model.axis(k)] - pw[model.axis(k)];
    const double n = space == DualSpace::H ? l2_norm(d) : dual_norm_star(d, riesz);
    acc += std::pow(model.coefficient(k) * n, 2);
  }
  return std::sqrt(acc);
}

/// Regularized diffusion K_{lambda,xi}(phi)[u_k] = g_k'(J_lambda(phi)) . grad R_xi phi.
struct RegularizedNoise {
  PotentialSpec spec;
  YosidaParams yosida;
  ResolventParams resolvent;
};

namespace detail {
inline SpectralField shape_slope_at_resolvent(const SpectralField &phi, const NoiseModel &model,
                                              const RegularizedNoise &reg) {
  return dealiased_map(phi, [&](double s) { return model.shape().first(resolvent_J(reg.spec, reg.yosida, s)); });
}

/// Per-axis products h'(J(phi)) d_a R_xi phi given the precomputed first factor.
inline std::vector<SpectralField> regularized_per_axis(const SpectralField &phi, const SpectralField &slope,
                                                       const NoiseModel &model, const ResolventParams &rp) {
  const SpectralField smooth = resolvent_Rxi(phi, rp);
  std::vector<SpectralField> out;
  const int used = std::min(model.dim(), std::max(model.num_modes(), 0));
  for (int a = 0; a < used; ++a) out.push_back(dealiased_product(slope, partial(smooth, a)));
  return out;
}
} // namespace detail

inline std::vector<SpectralField> K_lambda_xi_apply(const SpectralField &phi, const NoiseModel &model,
                                                    const RegularizedNoise &reg) {
  const SpectralField slope = detail::shape_slope_at_resolvent(phi, model, reg);
  return detail::expand_modes(detail::regularized_per_axis(phi, slope, model, reg.resolvent), model);
}

/// sum_k K_{lambda,xi}(phi)[u_k] dW_k with h'(J_lambda(phi)) supplied by the caller.
inline SpectralField K_lambda_xi_increment(const SpectralField &phi, const SpectralField &slope,
                                           const NoiseModel &model, const ResolventParams &rp,
                                           std::span<const double> dw) {
  return detail::combine(detail::regularized_per_axis(phi, slope, model, rp), model, dw, phi.grid());
}

inline double K_lambda_xi_hs_distance(const SpectralField &v, const SpectralField &w, const NoiseModel &model,
                                      const RegularizedNoise &reg) {
  const auto kv = K_lambda_xi_apply(v, model, reg);
  const auto kw = K_lambda_xi_apply(w, model, reg);
  double acc = 0.0;
  for (std::size_t k = 0; k < kv.size(); ++k) acc += std::pow(l2_norm(kv[k] - kw[k]), 2);
  return std::sqrt(acc);
}

/// (sum_k ||grad div g_k(phi)||^2)^(1/2) with
/// d_j div g_k(phi) = c_k (h''(phi) d_a phi d_j phi + h'(phi) d_j d_a phi), a = axis(k).
inline double grad_div_G_hs_norm(const SpectralField &phi, const NoiseModel &model) {
  detail::require_unit_ball(phi, "grad_div_G");
  const int d = phi.grid()->dim();
  const SpectralField h1 = dealiased_map(phi, [&](double s) { return model.shape().first(s); });
  const SpectralField h2 = dealiased_map(phi, [&](double s) { return model.shape().second(s); });
  const VectorField grad = gradient(phi);
  const int used = std::min(d, std::max(model.num_modes(), 0));
  std::vector<double> axis_norm2(d, 0.0);
  for (int a = 0; a < used; ++a) {
    for (int j = 0; j < d; ++j) {
      const SpectralField term = dealiased_product(h2, dealiased_product(grad[a], grad[j])) +
                                 dealiased_product(h1, partial(grad[a], j));
      axis_norm2[a] += std::pow(l2_norm(term), 2);
    }
  }
  double acc = 0.0;
  for (int k = 1; k <= model.num_modes(); ++k) acc += std::pow(model.coefficient(k), 2) * axis_norm2[model.axis(k)];
  return std::sqrt(acc);
}

} // namespace schac
