#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "schac/errors.hpp"

namespace schac {

/// Philox4x32-10 block function (Salmon et al., SC'11). A pure map from
/// (counter, key) to 128 random bits.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

namespace detail {
inline std::array<std::uint32_t, 2> split_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Uniform on (0, 1] from 53 random bits.
inline double open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

/// Two standard normals from one Philox block (Box-Muller).
inline std::array<double, 2> box_muller(const std::array<std::uint32_t, 4> &r) {
  const double u1 = open_unit(r[0], r[1]);
  const double u2 = open_unit(r[2], r[3]);
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}
} // namespace detail

/// Standard normal variate indexed by (seed, stream, step, mode). Pure
/// function: random access, no hidden state.
inline double standard_normal_at(std::uint64_t seed, std::uint32_t stream, std::uint64_t step, std::uint32_t mode) {
  const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                                         mode / 2u, stream};
  const auto pair = detail::box_muller(philox4x32(ctr, detail::split_key(seed)));
  return pair[mode % 2u];
}

/// Brownian increments of the truncated cylindrical Wiener process.
///
/// Increments are generated on a base step `fine_dt`; a step of length
/// dt = m fine_dt sums m consecutive base increments in a fixed order, so runs
/// at different dt on the same (seed, stream) see the same Brownian path.
class WienerDriver {
public:
  WienerDriver(std::uint64_t seed, std::uint32_t stream, double fine_dt)
      : seed_(seed), stream_(stream), fine_dt_(fine_dt) {
    if (!(fine_dt > 0.0)) throw ContractViolation("WienerDriver: fine_dt must be positive");
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint32_t stream() const noexcept { return stream_; }
  double fine_dt() const noexcept { return fine_dt_; }

  /// Number of base steps in one step of length dt.
  std::uint64_t substeps(double dt) const {
    if (!(dt > 0.0)) throw ContractViolation("WienerDriver: dt must be positive");
    const double ratio = dt / fine_dt_;
    const auto m = static_cast<std::uint64_t>(std::llround(ratio));
    if (m == 0 || std::abs(ratio - static_cast<double>(m)) > 1e-9 * ratio) {
      throw ContractViolation("WienerDriver: dt must be an integer multiple of fine_dt");
    }
    return m;
  }

  /// K independent N(0, dt) samples for step `step_index` of length dt.
  std::vector<double> increments(std::uint64_t step_index, double dt, std::size_t num_modes) const {
    const std::uint64_t m = substeps(dt);
    const double scale = std::sqrt(fine_dt_);
    std::vector<double> dw(num_modes, 0.0);
    for (std::uint64_t j = 0; j < m; ++j) {
      const std::uint64_t fine_step = step_index * m + j;
      for (std::size_t k = 0; k < num_modes; ++k) {
        dw[k] += scale * standard_normal_at(seed_, stream_, fine_step, static_cast<std::uint32_t>(k));
      }
    }
    return dw;
  }

private:
  std::uint64_t seed_;
  std::uint32_t stream_;
  double fine_dt_;
};

/// Sequential uniform/normal source over a counter-based stream, used for
/// random initial data and property-test inputs. Draws are disjoint from the
/// Wiener increments of the same (seed, stream).
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint32_t stream) : seed_(seed), stream_(stream) {}

  /// Uniform on (0, 1].
  double uniform() {
    const auto r = next_block();
    return detail::open_unit(r[0], r[1]);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return detail::box_muller(next_block())[0]; }

  std::uint64_t next_u64() {
    const auto r = next_block();
    return (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
  }

private:
  std::array<std::uint32_t, 4> next_block() {
    const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(counter_),
                                           static_cast<std::uint32_t>(counter_ >> 32), 0x80000000u, stream_};
    ++counter_;
    return philox4x32(ctr, detail::split_key(seed_));
  }

  std::uint64_t seed_;
  std::uint32_t stream_;
  std::uint64_t counter_ = 0;
};

} // namespace schac
