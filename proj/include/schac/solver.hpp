#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "schac/config.hpp"
#include "schac/errors.hpp"
#include "schac/grid.hpp"
#include "schac/noise.hpp"
#include "schac/operators.hpp"
#include "schac/potential.hpp"
#include "schac/rng.hpp"
#include "schac/snapshot.hpp"

namespace schac {

struct SolverState {
  SpectralField phi;
  double time = 0.0;
  std::uint64_t step_index = 0;
};

/// Per-path diagnostics sampled every `record_every` steps.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> energy;        ///< exact energy; NaN when max|phi| > 1
  std::vector<double> energy_yosida; ///< E_lambda
  std::vector<double> sup_abs_phi;
  std::vector<double> grad_norm;
  std::vector<double> mu_dev_norm;   ///< ||mu - mean(mu)||_H
  std::vector<double> mu_mean;
  std::vector<std::vector<double>> fields; ///< values at each record time when requested
  std::uint64_t steps_completed = 0;
  bool failed = false;
  std::string failure;

  std::size_t size() const noexcept { return times.size(); }
};

/// mu = -Laplacian phi + F'(phi), nonlinearity dealiased.
inline SpectralField chemical_potential(const SpectralField &phi, const Potential &pot) {
  SpectralField mu = f_prime_field(phi, pot);
  mu -= laplacian(phi);
  return mu;
}

/// 1/2 ||grad phi||^2 + mean(F(phi)) + offset, with F exact or F_lambda.
inline double energy(const SpectralField &phi, const PotentialSpec &spec, PotentialMode mode,
                     const YosidaParams &yosida = {}) {
  const Potential pot{spec, yosida, mode};
  double acc = 0.0;
  const auto v = phi.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    try {
      acc += pot.f_value(v[i]);
    } catch (const DomainError &e) {
      throw DomainError(std::string("energy: ") + e.what() + " at grid index " + std::to_string(i), i, v[i]);
    }
  }
  const double g = gradient_seminorm(phi);
  return 0.5 * g * g + acc / static_cast<double>(v.size()) + spec.offset;
}

/// sup over recorded times of |mean(phi(t)) - mean(phi(0))|.
inline double mass_gap(const TrajectoryRecord &rec) {
  double gap = 0.0;
  for (double m : rec.mass) gap = std::max(gap, std::abs(m - rec.mass.front()));
  return gap;
}

/// Stabilized linearly implicit Euler-Maruyama step for
///   d phi + A mu dt = noise(phi) dW,   mu = -Laplacian phi + F'(phi),
/// with A = alpha(-Laplacian) + beta(I - mean). Per nonzero mode k:
///   phi_k^{n+1} = [phi_k^n - dt a(k) (F'(phi^n) - kappa phi^n)_k + noise_k]
///                 / (1 + dt a(k) (|2 pi k|^2 + kappa)).
/// The zero mode is left untouched by the limit scheme; the regularized
/// scheme adds the mean of its (non-conservative) noise increment.
class Integrator {
public:
  Integrator(const RunConfig &config, GridPtr grid)
      : grid_(std::move(grid)), problem_(config.problem), potential_(config.dynamics_potential()),
        model_(config.noise_model()), kappa_(config.problem.stabilization(config.potential)) {
    problem_.validate();
    const auto mixed = problem_.mixed();
    const std::size_t n = grid_->size();
    drift_.resize(n);
    denom_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = i == 0 ? 0.0 : mixed.symbol(grid_->symbol(i));
      drift_[i] = problem_.dt * a;
      denom_[i] = 1.0 + problem_.dt * a * (grid_->symbol(i) + kappa_);
    }
  }

  const GridPtr &grid() const noexcept { return grid_; }
  const ProblemParams &problem() const noexcept { return problem_; }
  const Potential &potential() const noexcept { return potential_; }
  const NoiseModel &noise() const noexcept { return model_; }
  double kappa() const noexcept { return kappa_; }

  SolverState step(const SolverState &state, const WienerDriver &driver) const {
    const SpectralField &phi = state.phi;
    SpectralField nonlinear;
    SpectralField slope; // h'(J_lambda(phi)), regularized scheme only
    const bool regularized = problem_.scheme == Scheme::regularized;
    const bool noisy = model_.active();
    try {
      if (regularized) {
        evaluate_regularized(phi, nonlinear, slope, noisy);
      } else {
        nonlinear = f_prime_field(phi, potential_);
      }
    } catch (const DomainError &e) {
      throw DomainError("step " + std::to_string(state.step_index) + ": " + e.what(), e.index(), e.value());
    }
    nonlinear.axpy(-kappa_, phi);

    SpectralField noise_inc;
    if (noisy) {
      const auto dw = driver.increments(state.step_index, problem_.dt, static_cast<std::size_t>(model_.num_modes()));
      try {
        noise_inc = regularized ? K_lambda_xi_increment(phi, slope, model_, ResolventParams{problem_.xi}, dw)
                                : div_G_increment(phi, model_, dw);
      } catch (const DomainError &e) {
        throw DomainError("step " + std::to_string(state.step_index) + ": " + e.what(), e.index(), e.value());
      }
    }

    const auto p = phi.spectrum();
    const auto g = nonlinear.spectrum();
    std::vector<Complex> next(p.size());
    next[0] = p[0];
    if (noisy && regularized) next[0] += noise_inc.spectrum()[0];
    for (std::size_t i = 1; i < next.size(); ++i) {
      Complex rhs = p[i] - drift_[i] * g[i];
      if (noisy) rhs += noise_inc.spectrum()[i];
      next[i] = rhs / denom_[i];
    }
    SolverState out;
    out.phi = SpectralField::from_spectrum(grid_, std::move(next));
    const auto v = out.phi.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i])) {
        throw NonFiniteError("step " + std::to_string(state.step_index) + ": non-finite value at grid index " +
                                 std::to_string(i),
                             i);
      }
    }
    out.time = problem_.dt * static_cast<double>(state.step_index + 1);
    out.step_index = state.step_index + 1;
    return out;
  }

private:
  /// One resolvent solve per grid point feeds both F'_lambda and h'(J_lambda).
  void evaluate_regularized(const SpectralField &phi, SpectralField &fprime, SpectralField &slope,
                            bool need_slope) const {
    const SpectralField in = is_band_limited(phi) ? phi : truncate(phi);
    const auto v = in.values();
    std::vector<double> fp(v.size()), hp(need_slope ? v.size() : 0);
    const auto &spec = potential_.spec;
    for (std::size_t i = 0; i < v.size(); ++i) {
      try {
        const ResolventPoint r = resolve(spec, potential_.yosida, v[i]);
        fp[i] = spec.theta * r.log_ratio + regular_prime(spec, v[i]);
        if (need_slope) hp[i] = model_.shape().first(r.value);
      } catch (const NumericalError &e) {
        throw NumericalError(std::string(e.what()) + " (grid index " + std::to_string(i) + ")", e.input(), e.lambda(),
                             e.residual());
      }
    }
    fprime = truncate(SpectralField::from_values(grid_, std::move(fp)));
    if (need_slope) slope = truncate(SpectralField::from_values(grid_, std::move(hp)));
  }

  GridPtr grid_;
  ProblemParams problem_;
  Potential potential_;
  NoiseModel model_;
  double kappa_;
  std::vector<double> drift_;
  std::vector<double> denom_;
};

/// Initial datum from the `initial` config section, projected onto the 2/3 band.
inline SpectralField initial_field(const RunConfig &config, const GridPtr &grid) {
  const auto &ic = config.initial;
  SpectralField f;
  if (ic.kind == "modes") {
    f = SpectralField::from_function(grid, [&](const std::array<double, 3> &x) {
      double v = ic.mean;
      for (const auto &m : ic.modes) {
        double arg = m.phase;
        for (std::size_t a = 0; a < m.k.size() && a < 3; ++a) arg += kTwoPi * static_cast<double>(m.k[a]) * x[a];
        v += m.amplitude * std::cos(arg);
      }
      return v;
    });
  } else if (ic.kind == "random") {
    CounterRng rng(ic.seed, 0);
    std::vector<Complex> spec(grid->size(), Complex(0.0, 0.0));
    for (std::size_t i = 1; i < spec.size(); ++i) {
      const auto &k = grid->wavevector(i);
      bool inside = grid->in_band(i);
      for (int a = 0; a < grid->dim(); ++a) inside = inside && std::abs(k[a]) <= ic.bandwidth;
      const double re = rng.normal();
      const double im = rng.normal();
      if (inside) spec[i] = Complex(re, im);
    }
    SpectralField raw = SpectralField::from_spectrum(grid, std::move(spec));
    const double peak = max_abs(raw);
    std::vector<double> v(raw.values().begin(), raw.values().end());
    for (auto &x : v) x = std::clamp(ic.mean + (peak > 0.0 ? ic.amplitude * x / peak : 0.0), -0.9, 0.9);
    f = SpectralField::from_values(grid, std::move(v));
  } else if (ic.kind == "snapshot") {
    f = snapshot_field(read_snapshot(ic.path), grid);
  } else {
    throw ConfigError("unknown initial kind '" + ic.kind + "' (expected modes|random|snapshot)");
  }
  return truncate(f);
}

struct SimulateOptions {
  bool keep_fields = false;
  std::string snapshot_dir; ///< empty: no snapshot files
  std::string snapshot_prefix = "phi";
  /// Overrides the configured initial datum when non-empty.
  SpectralField initial;
};

namespace detail {
/// Appends one row; everything is evaluated before the first push so a
/// throwing diagnostic leaves the columns the same length.
inline void record_diagnostics(TrajectoryRecord &rec, const SolverState &s, const Integrator &integ,
                               const RunConfig &config, bool keep_fields) {
  const SpectralField &phi = s.phi;
  const double sup = max_abs(phi);
  const double e_exact =
      sup <= 1.0 ? energy(phi, config.potential, PotentialMode::exact) : std::numeric_limits<double>::quiet_NaN();
  const double e_yosida = energy(phi, config.potential, PotentialMode::yosida, config.yosida());
  const SpectralField mu = chemical_potential(phi, integ.potential());
  const double mu_dev = l2_norm(mu - SpectralField::constant(phi.grid(), mu.mean()));
  rec.times.push_back(s.time);
  rec.mass.push_back(phi.mean());
  rec.energy.push_back(e_exact);
  rec.energy_yosida.push_back(e_yosida);
  rec.sup_abs_phi.push_back(sup);
  rec.grad_norm.push_back(gradient_seminorm(phi));
  rec.mu_mean.push_back(mu.mean());
  rec.mu_dev_norm.push_back(mu_dev);
  if (keep_fields) rec.fields.emplace_back(phi.values().begin(), phi.values().end());
}
} // namespace detail

/// Runs one path. Bit-reproducible for fixed (config, seed, stream). On a
/// mid-run failure the record holds everything up to the failing step and
/// carries `failed = true` with the error message.
inline TrajectoryRecord simulate(const RunConfig &config, std::uint64_t seed, std::uint32_t stream,
                                 const SimulateOptions &options = {}) {
  const GridPtr grid = config.make_grid();
  const Integrator integ(config, grid);
  const double fine_dt = config.time.fine_dt > 0.0 ? config.time.fine_dt : config.problem.dt;
  const WienerDriver driver(seed, stream, fine_dt);
  TrajectoryRecord rec;

  auto snapshot = [&](const SolverState &s, std::size_t record_index) {
    if (options.snapshot_dir.empty() || config.time.snapshot_every <= 0) return;
    if (record_index % static_cast<std::size_t>(config.time.snapshot_every) != 0) return;
    char name[64];
    std::snprintf(name, sizeof name, "%s_s%u_%06zu.field", options.snapshot_prefix.c_str(), stream, record_index);
    write_snapshot((std::filesystem::path(options.snapshot_dir) / name).string(), "phi", s.time, s.phi);
  };

  SolverState state;
  try {
    state.phi = options.initial.empty() ? initial_field(config, grid) : truncate(options.initial);
    detail::record_diagnostics(rec, state, integ, config, options.keep_fields);
    snapshot(state, 0);
    const auto steps = static_cast<std::uint64_t>(std::llround(config.problem.t_end / config.problem.dt));
    const auto every = static_cast<std::uint64_t>(config.time.record_every);
    for (std::uint64_t n = 0; n < steps; ++n) {
      state = integ.step(state, driver);
      rec.steps_completed = state.step_index;
      if (state.step_index % every == 0 || state.step_index == steps) {
        detail::record_diagnostics(rec, state, integ, config, options.keep_fields);
        snapshot(state, rec.size() - 1);
      }
    }
  } catch (const Error &e) {
    rec.failed = true;
    rec.failure = e.what();
  }
  return rec;
}

} // namespace schac
