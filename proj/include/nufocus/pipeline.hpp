#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nufocus/config.hpp"
#include "nufocus/nuclear.hpp"
#include "nufocus/propagator.hpp"
#include "nufocus/spin.hpp"

namespace nufocus {

struct ObservableRow {
  double scan_value = 0.0;      // internal units of the scan axis
  double mean_n = 0.0;
  double variance_n = 0.0;
  double freq_shift_GHz = 0.0;  // ordinary frequency
  double amplitude = 0.0;       // mean |S_perp| of the precessing spin
  /// <cos(omega_e T_R)> over P(n): near +1 when the distribution sits on the
  /// PSC comb, negative when it sits between the teeth.
  double psc_coherence = 0.0;
  std::string distribution_ref;
  /// "ok", "degenerate_weights" (no precessing spin; shift from <n>), or the
  /// tag of the error that stopped this point.
  std::string status = "ok";
  std::string message;
};

/// Electron steady state and excitation asymmetry at each grid frequency.
struct GridSpin {
  std::vector<double> omega;  // rad/s
  std::vector<BlochState> spin;
  std::vector<ExcitationAsymmetry> alpha;
  bool used_cache = false;
  double cache_error = 0.0;  // audited interpolation error, when the cache was used
};

struct PipelineOptions {
  /// Nuclear count for the polarization grid; bath.N_nuclei when unset.
  std::optional<int> N_nuclei;
  int threads = 1;
};

struct PipelineResult {
  SimulationConfig config;  // with N_nuclei as actually used
  PolarizationGrid grid;
  GridSpin spin;
  FlipRates rates;
  NuclearDistribution distribution;
  ObservableRow row;
};

/// (1, 1) when the pulse reaches no trion; the optical flip rate is zero then.
ExcitationAsymmetry asymmetry_or_unity(const Propagator& u);

/// Propagators for the given frequencies: interpolated from a cache when
/// numerics.use_cache is set and the cache passes its audit, exact otherwise.
struct PropagatorSet {
  std::vector<Propagator> props;
  bool used_cache = false;
  double cache_error = 0.0;
};
PropagatorSet propagators_for(const SimulationConfig& config, std::span<const double> omegas, int threads);

GridSpin spin_on_grid(const SimulationConfig& config, std::span<const double> omegas, int threads);

/// Steady-state electron spin, flip rates, stationary P(n) and observables.
PipelineResult run_pipeline(const SimulationConfig& config, const PipelineOptions& options = {});

/// Amplitude-weighted precession frequency of the distribution. Falls back to
/// the Overhauser shift of <n> with zero amplitude when no spin precesses.
ObservableRow observables_from_distribution(const PolarizationGrid& grid, std::span<const double> p,
                                            const GridSpin& spin, const DotParams& dot,
                                            const BathParams& bath);

double psc_coherence(std::span<const double> omegas, std::span<const double> p, const DotParams& dot);

SimulationConfig with_axis_value(const SimulationConfig& config, ScanAxis axis, double value);

/// Called after each successful point; may set row.distribution_ref.
using ScanHook = std::function<void(std::size_t index, const PipelineResult& result, ObservableRow& row)>;

/// One pipeline run per value of config.scan, rows in input order. Errors are
/// recorded in the row and the scan continues. An axis of `none` gives one row.
std::vector<ObservableRow> scan(const SimulationConfig& config, const PipelineOptions& options = {},
                                const ScanHook& hook = {});

struct DriftSample {
  double n;
  double omega;  // rad/s
  double w_plus;
  double w_minus;
  double drift;  // 1/s
};

/// Mean-polarization drift sampled finely in n (numerics.drift_samples_per_psc
/// points per PSC spacing) over [n_lo, n_hi], for a bath of N nuclei.
std::vector<DriftSample> drift_curve(const SimulationConfig& config, int N, double n_lo, double n_hi,
                                     int threads = 1);

}  // namespace nufocus
