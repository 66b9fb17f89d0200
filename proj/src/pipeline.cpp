#include "nufocus/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "nufocus/errors.hpp"
#include "nufocus/kernels/kernels.hpp"
#include "nufocus/parallel.hpp"

namespace nufocus {
namespace {

constexpr double degenerate_weight = 1e-12;

std::vector<double> grid_frequencies(const PolarizationGrid& grid, const DotParams& dot, const BathParams& bath,
                                     double omega_min) {
  std::vector<double> w(grid.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = precession_frequency(grid.n(k), dot, bath, omega_min);
  return w;
}

}  // namespace

ExcitationAsymmetry asymmetry_or_unity(const Propagator& u) {
  try {
    return excitation_asymmetry(u);
  } catch (const NoExcitation&) {
    return {1.0, 1.0};
  }
}

PropagatorSet propagators_for(const SimulationConfig& config, std::span<const double> omegas, int threads) {
  const auto opts = IntegratorOptions::from(config.numerics);
  PropagatorSet out;
  if (config.numerics.use_cache && omegas.size() > 1) {
    const auto [lo, hi] = std::minmax_element(omegas.begin(), omegas.end());
    const double step = config.numerics.cache_step_fraction * psc_spacing(config.dot);
    const PropagatorCache cache(config.pulse, *lo, *hi, step, opts, threads);

    // Linear interpolation is worst halfway between nodes.
    std::vector<double> probes;
    const std::size_t intervals = cache.size() - 1;
    for (int i = 0; i < kernels::lanes; ++i) {
      const std::size_t j = std::min(intervals - 1, intervals * static_cast<std::size_t>(2 * i + 1) / (2 * kernels::lanes));
      probes.push_back(cache.omega_lo() + (static_cast<double>(j) + 0.5) * cache.step());
    }
    out.cache_error = cache.audit(probes);
    if (out.cache_error < config.numerics.interp_tol) {
      out.used_cache = true;
      out.props.resize(omegas.size());
      for (std::size_t i = 0; i < omegas.size(); ++i) out.props[i] = cache.at(omegas[i]);
      return out;
    }
  }
  out.props = propagate_pulses(config.pulse, omegas, opts, threads);
  return out;
}

GridSpin spin_on_grid(const SimulationConfig& config, std::span<const double> omegas, int threads) {
  const auto set = propagators_for(config, omegas, threads);
  GridSpin g;
  g.used_cache = set.used_cache;
  g.cache_error = set.cache_error;
  g.omega.assign(omegas.begin(), omegas.end());
  g.spin.resize(omegas.size());
  g.alpha.resize(omegas.size());
  parallel_for(omegas.size(), threads, [&](std::size_t i) {
    g.spin[i] = steady_state(set.props[i], omegas[i], config.dot);
    g.alpha[i] = asymmetry_or_unity(set.props[i]);
  });
  return g;
}

double psc_coherence(std::span<const double> omegas, std::span<const double> p, const DotParams& dot) {
  double c = 0.0, mass = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    c += p[k] * std::cos(omegas[k] * dot.T_R);
    mass += p[k];
  }
  return c / mass;
}

ObservableRow observables_from_distribution(const PolarizationGrid& grid, std::span<const double> p,
                                            const GridSpin& spin, const DotParams& dot,
                                            const BathParams& bath) {
  if (p.size() != grid.size() || spin.spin.size() != grid.size() || spin.omega.size() != grid.size()) {
    throw MisalignedTables("distribution and spin table do not match the polarization grid");
  }
  ObservableRow row;
  const Moments m = moments(grid, p);
  row.mean_n = m.mean;
  row.variance_n = m.variance;
  row.psc_coherence = psc_coherence(spin.omega, p, dot);

  double weight = 0.0, weighted_omega = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double s_perp = std::hypot(spin.spin[k].s[1], spin.spin[k].s[2]);
    weight += p[k] * s_perp;
    weighted_omega += p[k] * s_perp * spin.omega[k];
  }
  if (weight < degenerate_weight) {
    row.status = "degenerate_weights";
    row.amplitude = 0.0;
    row.freq_shift_GHz = units::angular_to_GHz(units::energy_to_angular(m.mean * bath.A_hyperfine));
    return row;
  }
  row.amplitude = 0.5 * weight;
  row.freq_shift_GHz = units::angular_to_GHz(weighted_omega / weight - zeeman_frequency(dot));
  return row;
}

PipelineResult run_pipeline(const SimulationConfig& config, const PipelineOptions& options) {
  PipelineResult r;
  r.config = config;
  if (options.N_nuclei) r.config.bath.N_nuclei = *options.N_nuclei;
  validate(r.config);
  const auto& c = r.config;
  const int threads = std::max(1, options.threads);

  r.grid = PolarizationGrid::make(c.bath, c.dot, c.numerics.omega_min);
  const auto omegas = grid_frequencies(r.grid, c.dot, c.bath, c.numerics.omega_min);

  r.spin = spin_on_grid(c, omegas, threads);
  r.rates = flip_rates(r.grid, omegas, r.spin.spin, r.spin.alpha, c.bath, c.dot);
  r.distribution = steady_distribution(r.grid, r.rates, c.numerics.residual_tol);
  r.row = observables_from_distribution(r.grid, r.distribution.p, r.spin, c.dot, c.bath);
  return r;
}

SimulationConfig with_axis_value(const SimulationConfig& config, ScanAxis axis, double value) {
  SimulationConfig c = config;
  switch (axis) {
    case ScanAxis::none: break;
    case ScanAxis::detuning: c.pulse.detuning = value; break;
    case ScanAxis::area: c.pulse.area = value; break;
    case ScanAxis::B_field: c.dot.B_field = value; break;
    case ScanAxis::retardance: c.pulse.retardance = value; break;
  }
  return c;
}

std::vector<ObservableRow> scan(const SimulationConfig& config, const PipelineOptions& options, const ScanHook& hook) {
  std::vector<double> values = config.scan.values;
  if (config.scan.axis == ScanAxis::none || values.empty()) values = {0.0};

  std::vector<ObservableRow> rows;
  rows.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    ObservableRow row;
    try {
      const auto result = run_pipeline(with_axis_value(config, config.scan.axis, values[i]), options);
      row = result.row;
      row.scan_value = values[i];
      if (hook) hook(i, result, row);
    } catch (const Error& e) {
      row = ObservableRow{};
      row.status = e.tag();
      row.message = e.what();
      row.mean_n = row.variance_n = row.freq_shift_GHz = row.amplitude = row.psc_coherence = std::nan("");
    }
    row.scan_value = values[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<DriftSample> drift_curve(const SimulationConfig& config, int N, double n_lo, double n_hi, int threads) {
  const double A = units::energy_to_angular(config.bath.A_hyperfine);
  const double dn = psc_spacing(config.dot) / A / std::max(1, config.numerics.drift_samples_per_psc);
  const auto count = static_cast<std::size_t>(std::floor((n_hi - n_lo) / dn + 1e-9)) + 1;

  std::vector<double> ns(count), omegas(count);
  for (std::size_t i = 0; i < count; ++i) {
    ns[i] = n_lo + static_cast<double>(i) * dn;
    omegas[i] = precession_frequency(ns[i], config.dot, config.bath, config.numerics.omega_min);
  }
  const GridSpin g = spin_on_grid(config, omegas, threads);

  std::vector<double> pre(count), ap(count), am(count), rho(count), sx(count), wp(count), wm(count);
  for (std::size_t i = 0; i < count; ++i) {
    pre[i] = flip_prefactor(omegas[i], config.bath, N);
    ap[i] = g.alpha[i].alpha_plus;
    am[i] = g.alpha[i].alpha_minus;
    rho[i] = g.spin[i].trion_yield;
    sx[i] = g.spin[i].s[0];
  }
  kernels::active().flip_rates(count, pre.data(), ap.data(), am.data(), rho.data(), sx.data(),
                               1.0 / config.dot.T_R, config.bath.gamma_depol, wp.data(), wm.data());

  std::vector<DriftSample> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = {ns[i], omegas[i], wp[i], wm[i], mean_drift(ns[i], wp[i], wm[i])};
  return out;
}

}  // namespace nufocus
