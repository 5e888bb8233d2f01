#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace schac {

using Complex = std::complex<double>;

/// Iterative radix-2 Cooley-Tukey transform of a fixed power-of-two length.
///
/// The plan (bit-reversal table and twiddles) is immutable after
/// construction, so one plan can be shared by any number of threads. Results
/// are a pure function of the input: no runtime dispatch on alignment or
/// planner heuristics, which keeps ensemble output byte-reproducible.
class Radix2Plan {
public:
  explicit Radix2Plan(std::size_t n) : n_(n), bitrev_(n), twiddle_(n / 2) {
    if (n < 2 || !std::has_single_bit(n)) {
      throw std::invalid_argument("Radix2Plan: length must be a power of two >= 2");
    }
    const unsigned bits = static_cast<unsigned>(std::countr_zero(n));
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (unsigned b = 0; b < bits; ++b) {
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      }
      bitrev_[i] = r;
    }
    for (std::size_t j = 0; j < n / 2; ++j) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) /
                           static_cast<double>(n);
      twiddle_[j] = Complex(std::cos(angle), std::sin(angle));
    }
  }

  std::size_t size() const noexcept { return n_; }

  /// Unnormalized in-place transform. `inverse` flips the exponent sign.
  void execute(std::span<Complex> a, bool inverse) const {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j = bitrev_[i];
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t step = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          Complex w = twiddle_[j * step];
          if (inverse) w = std::conj(w);
          const Complex u = a[start + j];
          const Complex v = a[start + j + half] * w;
          a[start + j] = u + v;
          a[start + j + half] = u - v;
        }
      }
    }
  }

private:
  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> twiddle_;
};

/// Transform over a d-dimensional cube of side n stored row-major (last axis
/// contiguous). Forward output is normalized by 1/n^d so that coefficient 0
/// is the spatial mean.
class CubeFft {
public:
  CubeFft(int dim, std::size_t n) : dim_(dim), n_(n), plan_(n) {}

  int dim() const noexcept { return dim_; }
  std::size_t side() const noexcept { return n_; }

  void forward(std::span<Complex> data) const {
    run(data, false);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto &c : data) c *= scale;
  }

  void inverse(std::span<Complex> data) const { run(data, true); }

private:
  void run(std::span<Complex> data, bool inverse) const {
    const std::size_t total = data.size();
    std::vector<Complex> line(n_);
    std::size_t stride = 1;
    for (int axis = dim_ - 1; axis >= 0; --axis) {
      if (stride == 1) {
        for (std::size_t off = 0; off < total; off += n_) {
          plan_.execute(data.subspan(off, n_), inverse);
        }
      } else {
        const std::size_t block = stride * n_;
        for (std::size_t outer = 0; outer < total; outer += block) {
          for (std::size_t inner = 0; inner < stride; ++inner) {
            const std::size_t base = outer + inner;
            for (std::size_t i = 0; i < n_; ++i) line[i] = data[base + i * stride];
            plan_.execute(line, inverse);
            for (std::size_t i = 0; i < n_; ++i) data[base + i * stride] = line[i];
          }
        }
      }
      stride *= n_;
    }
  }

  int dim_;
  std::size_t n_;
  Radix2Plan plan_;
};

} // namespace schac
