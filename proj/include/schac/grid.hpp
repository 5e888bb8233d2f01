#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "schac/errors.hpp"
#include "schac/fft.hpp"

namespace schac {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Poincare constant of the unit torus: 1 / (2 pi), the inverse square root
/// of the smallest nonzero eigenvalue of -Laplacian.
inline constexpr double kPoincare = 1.0 / kTwoPi;

/// Uniform grid on the unit torus R^d / Z^d with N points per axis.
///
/// Holds every per-mode table the spectral calculus needs: integer
/// wavenumbers, |2 pi k|^2, the index of -k, Nyquist flags and the 2/3-rule
/// band. Immutable once built; share it through `GridPtr`.
class TorusGrid {
public:
  TorusGrid(int dim, std::size_t n) : dim_(dim), n_(n), fft_(dim, check(dim, n)) {
    size_ = 1;
    for (int a = 0; a < dim_; ++a) size_ *= n_;
    const long half = static_cast<long>(n_ / 2);
    const long band = static_cast<long>(n_ / 3);
    wavenumbers_.resize(size_);
    symbol_.resize(size_);
    lap_symbol_.resize(size_);
    conj_index_.resize(size_);
    in_band_.resize(size_);
    for (std::size_t idx = 0; idx < size_; ++idx) {
      std::array<long, 3> k{0, 0, 0};
      std::size_t rem = idx;
      std::size_t neg = 0;
      std::size_t stride = 1;
      for (int a = dim_ - 1; a >= 0; --a) {
        const std::size_t i = rem % n_;
        rem /= n_;
        k[a] = (static_cast<long>(i) < half) ? static_cast<long>(i)
                                             : static_cast<long>(i) - static_cast<long>(n_);
        neg += ((n_ - i) % n_) * stride;
        stride *= n_;
      }
      wavenumbers_[idx] = k;
      conj_index_[idx] = neg;
      double q = 0.0;
      double q_lap = 0.0;
      bool inside = true;
      for (int a = 0; a < dim_; ++a) {
        const double w = kTwoPi * static_cast<double>(k[a]);
        q += w * w;
        if (k[a] != -half) q_lap += w * w;
        if (std::abs(k[a]) > band) inside = false;
      }
      symbol_[idx] = q;
      lap_symbol_[idx] = q_lap;
      in_band_[idx] = inside;
    }
  }

  int dim() const noexcept { return dim_; }
  std::size_t points_per_axis() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }
  const CubeFft &fft() const noexcept { return fft_; }

  /// Integer wavevector of linear spectral index `idx` (unused axes are 0).
  const std::array<long, 3> &wavevector(std::size_t idx) const { return wavenumbers_[idx]; }
  /// |2 pi k|^2 including Nyquist components.
  double symbol(std::size_t idx) const { return symbol_[idx]; }
  /// |2 pi k|^2 with Nyquist axis components dropped; the symbol of
  /// divergence(gradient(.)).
  double laplacian_symbol(std::size_t idx) const { return lap_symbol_[idx]; }
  std::size_t conjugate_index(std::size_t idx) const { return conj_index_[idx]; }
  /// 2/3-rule band: every |k_a| <= floor(N/3).
  bool in_band(std::size_t idx) const { return in_band_[idx]; }
  bool is_nyquist(std::size_t idx, int axis) const {
    return wavenumbers_[idx][axis] == -static_cast<long>(n_ / 2);
  }
  /// Angular frequency 2 pi k_a used by first derivatives; 0 on the Nyquist plane.
  double derivative_frequency(std::size_t idx, int axis) const {
    return is_nyquist(idx, axis) ? 0.0 : kTwoPi * static_cast<double>(wavenumbers_[idx][axis]);
  }

  /// Physical coordinate of grid point `idx` along each axis.
  std::array<double, 3> point(std::size_t idx) const {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = dim_ - 1; a >= 0; --a) {
      x[a] = static_cast<double>(idx % n_) / static_cast<double>(n_);
      idx /= n_;
    }
    return x;
  }

  bool operator==(const TorusGrid &o) const noexcept { return dim_ == o.dim_ && n_ == o.n_; }

private:
  static std::size_t check(int dim, std::size_t n) {
    if (dim < 1 || dim > 3) throw ContractViolation("TorusGrid: dim must be 1, 2 or 3");
    if (n < 4 || (n & (n - 1)) != 0) {
      throw ContractViolation("TorusGrid: points per axis must be a power of two >= 4");
    }
    return n;
  }

  int dim_;
  std::size_t n_;
  std::size_t size_ = 0;
  CubeFft fft_;
  std::vector<std::array<long, 3>> wavenumbers_;
  std::vector<double> symbol_;
  std::vector<double> lap_symbol_;
  std::vector<std::size_t> conj_index_;
  std::vector<bool> in_band_;
};

using GridPtr = std::shared_ptr<const TorusGrid>;

inline GridPtr make_grid(int dim, std::size_t n) { return std::make_shared<const TorusGrid>(dim, n); }

/// Real periodic scalar field with its Fourier coefficients.
///
/// Both representations are computed eagerly at construction, so a field is
/// an immutable value that can be read concurrently. Coefficients follow
/// values(x) = sum_k spectrum_k exp(2 pi i k.x); spectrum_0 is the mean.
class SpectralField {
public:
  SpectralField() = default;

  static SpectralField from_values(GridPtr grid, std::vector<double> values) {
    if (values.size() != grid->size()) throw ContractViolation("SpectralField: value count does not match grid");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        throw NonFiniteError("non-finite field value at grid index " + std::to_string(i), i);
      }
    }
    std::vector<Complex> spec(values.begin(), values.end());
    grid->fft().forward(spec);
    SpectralField f;
    f.grid_ = std::move(grid);
    f.values_ = std::move(values);
    f.spectrum_ = std::move(spec);
    return f;
  }

  /// Builds a field from coefficients; the Hermitian part is kept so the
  /// field is real. Coefficients that are already Hermitian pass through
  /// bit-exactly.
  static SpectralField from_spectrum(GridPtr grid, std::vector<Complex> spec) {
    if (spec.size() != grid->size()) throw ContractViolation("SpectralField: coefficient count does not match grid");
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const std::size_t j = grid->conjugate_index(i);
      if (j < i) continue;
      if (j == i) {
        spec[i] = Complex(spec[i].real(), 0.0);
      } else {
        const Complex a = spec[i];
        const Complex b = std::conj(spec[j]);
        if (a != b) {
          const Complex h = 0.5 * (a + b);
          spec[i] = h;
          spec[j] = std::conj(h);
        }
      }
    }
    std::vector<Complex> work = spec;
    grid->fft().inverse(work);
    std::vector<double> values(work.size());
    for (std::size_t i = 0; i < work.size(); ++i) values[i] = work[i].real();
    SpectralField f;
    f.grid_ = std::move(grid);
    f.values_ = std::move(values);
    f.spectrum_ = std::move(spec);
    return f;
  }

  static SpectralField constant(GridPtr grid, double c) {
    const std::size_t n = grid->size();
    return from_values(std::move(grid), std::vector<double>(n, c));
  }

  static SpectralField zeros(GridPtr grid) { return constant(std::move(grid), 0.0); }

  template <class Fn>
  static SpectralField from_function(GridPtr grid, Fn &&fn) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid->point(i));
    return from_values(std::move(grid), std::move(v));
  }

  const GridPtr &grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const Complex> spectrum() const noexcept { return spectrum_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  /// Zero Fourier mode.
  double mean() const noexcept { return spectrum_.empty() ? 0.0 : spectrum_[0].real(); }

  SpectralField &operator+=(const SpectralField &o) { return axpy(1.0, o); }
  SpectralField &operator-=(const SpectralField &o) { return axpy(-1.0, o); }
  SpectralField &operator*=(double c) {
    for (auto &v : values_) v *= c;
    for (auto &s : spectrum_) s *= c;
    return *this;
  }

  /// this += c * o, applied to both representations.
  SpectralField &axpy(double c, const SpectralField &o) {
    require_same_grid(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += c * o.values_[i];
    for (std::size_t i = 0; i < spectrum_.size(); ++i) spectrum_[i] += c * o.spectrum_[i];
    return *this;
  }

  void require_same_grid(const SpectralField &o) const {
    if (!grid_ || !o.grid_ || !(*grid_ == *o.grid_)) {
      throw ContractViolation("fields live on different grids");
    }
  }

private:
  GridPtr grid_;
  std::vector<double> values_;
  std::vector<Complex> spectrum_;
};

inline SpectralField operator+(SpectralField a, const SpectralField &b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField &b) { return a -= b; }
inline SpectralField operator*(double c, SpectralField a) { return a *= c; }

/// d scalar components on a common grid.
struct VectorField {
  std::vector<SpectralField> components;

  std::size_t dim() const noexcept { return components.size(); }
  const SpectralField &operator[](std::size_t a) const { return components[a]; }
};

/// Forward transform of a field's values (a copy of the cached spectrum).
inline std::vector<Complex> transform_forward(const SpectralField &f) {
  return {f.spectrum().begin(), f.spectrum().end()};
}

/// Applies a real, even Fourier multiplier m(idx).
template <class Multiplier>
SpectralField apply_multiplier(const SpectralField &f, Multiplier &&m) {
  std::vector<Complex> s(f.spectrum().begin(), f.spectrum().end());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= m(i);
  return SpectralField::from_spectrum(f.grid(), std::move(s));
}

inline double mean(const SpectralField &f) { return f.mean(); }

inline SpectralField laplacian(const SpectralField &f) {
  const auto &g = *f.grid();
  std::vector<Complex> s(f.spectrum().begin(), f.spectrum().end());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= -g.laplacian_symbol(i);
  s[0] = Complex(0.0, 0.0);
  return SpectralField::from_spectrum(f.grid(), std::move(s));
}

/// Partial derivative along one axis (Nyquist plane zeroed).
inline SpectralField partial(const SpectralField &f, int axis) {
  const auto &g = *f.grid();
  std::vector<Complex> s(f.spectrum().begin(), f.spectrum().end());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= Complex(0.0, g.derivative_frequency(i, axis));
  s[0] = Complex(0.0, 0.0);
  return SpectralField::from_spectrum(f.grid(), std::move(s));
}

inline VectorField gradient(const SpectralField &f) {
  VectorField v;
  for (int a = 0; a < f.grid()->dim(); ++a) v.components.push_back(partial(f, a));
  return v;
}

/// Spectral divergence. The zero mode of the result is assigned exactly 0,
/// which is what makes divergence-form noise conserve mass to the last bit.
inline SpectralField divergence(const VectorField &v) {
  if (v.components.empty()) throw ContractViolation("divergence: empty vector field");
  const GridPtr &grid = v.components.front().grid();
  if (static_cast<int>(v.dim()) != grid->dim()) {
    throw ContractViolation("divergence: component count does not match grid dimension");
  }
  std::vector<Complex> s(grid->size(), Complex(0.0, 0.0));
  for (int a = 0; a < grid->dim(); ++a) {
    v.components[a].require_same_grid(v.components.front());
    const auto src = v.components[a].spectrum();
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] += Complex(0.0, grid->derivative_frequency(i, a)) * src[i];
    }
  }
  s[0] = Complex(0.0, 0.0);
  return SpectralField::from_spectrum(grid, std::move(s));
}

/// L^2 inner product with unit-measure normalization (Parseval sum).
inline double inner(const SpectralField &f, const SpectralField &g) {
  f.require_same_grid(g);
  const auto a = f.values();
  const auto b = g.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc / static_cast<double>(a.size());
}

/// Spectral sum  sum_k w(k) |f_k|^2.
template <class Weight>
double weighted_spectral_sum(const SpectralField &f, Weight &&w) {
  double acc = 0.0;
  const auto s = f.spectrum();
  for (std::size_t i = 0; i < s.size(); ++i) acc += w(i) * std::norm(s[i]);
  return acc;
}

/// Fractional Sobolev norm (sum_k (1 + |2 pi k|^2)^s |f_k|^2)^(1/2), s in [-2, 2].
inline double sobolev_norm(const SpectralField &f, double s) {
  if (s < -2.0 || s > 2.0) throw ContractViolation("sobolev_norm: order must lie in [-2, 2]");
  const auto &g = *f.grid();
  return std::sqrt(weighted_spectral_sum(f, [&](std::size_t i) { return std::pow(1.0 + g.symbol(i), s); }));
}

inline double l2_norm(const SpectralField &f) {
  return std::sqrt(weighted_spectral_sum(f, [](std::size_t) { return 1.0; }));
}

/// Seminorm ||grad f||_H computed from the full symbol |2 pi k|^2.
inline double gradient_seminorm(const SpectralField &f) {
  const auto &g = *f.grid();
  return std::sqrt(weighted_spectral_sum(f, [&](std::size_t i) { return g.symbol(i); }));
}

inline double l2_norm(const VectorField &v) {
  double acc = 0.0;
  for (const auto &c : v.components) acc += std::pow(l2_norm(c), 2);
  return std::sqrt(acc);
}

inline double max_abs(const SpectralField &f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

/// Grid approximation of ||f||_{L^p} with unit measure.
inline double lp_norm(const SpectralField &f, double p) {
  double acc = 0.0;
  for (double v : f.values()) acc += std::pow(std::abs(v), p);
  return std::pow(acc / static_cast<double>(f.size()), 1.0 / p);
}

/// Zeroes every coefficient outside the 2/3-rule band.
inline SpectralField truncate(const SpectralField &f) {
  const auto &g = *f.grid();
  return apply_multiplier(f, [&](std::size_t i) { return g.in_band(i) ? 1.0 : 0.0; });
}

inline bool is_band_limited(const SpectralField &f) {
  const auto &g = *f.grid();
  const auto s = f.spectrum();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!g.in_band(i) && s[i] != Complex(0.0, 0.0)) return false;
  }
  return true;
}

/// Pointwise product with 2/3-rule truncation of both inputs and the output.
inline SpectralField dealiased_product(const SpectralField &f, const SpectralField &g) {
  f.require_same_grid(g);
  const SpectralField ft = is_band_limited(f) ? f : truncate(f);
  const SpectralField gt = is_band_limited(g) ? g : truncate(g);
  std::vector<double> p(ft.size());
  const auto a = ft.values();
  const auto b = gt.values();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = a[i] * b[i];
  return truncate(SpectralField::from_values(f.grid(), std::move(p)));
}

/// Pointwise map x -> fn(x) with 2/3-rule truncation of input and output.
/// Domain and numerical errors raised by `fn` are rethrown with the
/// offending grid index.
template <class Fn>
SpectralField dealiased_map(const SpectralField &f, Fn &&fn) {
  const SpectralField ft = is_band_limited(f) ? f : truncate(f);
  std::vector<double> out(ft.size());
  const auto in = ft.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    try {
      out[i] = fn(in[i]);
    } catch (const DomainError &e) {
      throw DomainError(std::string(e.what()) + " (grid index " + std::to_string(i) + ")", i, e.value());
    } catch (const NumericalError &e) {
      throw NumericalError(std::string(e.what()) + " (grid index " + std::to_string(i) + ")", e.input(),
                           e.lambda(), e.residual());
    }
  }
  return truncate(SpectralField::from_values(f.grid(), std::move(out)));
}

} // namespace schac
