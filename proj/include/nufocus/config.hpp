#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nufocus/units.hpp"

namespace nufocus {

struct DotParams {
  double g_factor = 0.43;      // |g| giving 12 GHz precession at 2 T
  double B_field = 2.0;        // T
  double T2_electron = 100e-9; // s
  double T_R = 12.3e-9;        // s, pulse repetition period

  bool operator==(const DotParams&) const = default;
};

struct PulseParams {
  double area = units::pi;         // rad, on one z-basis transition
  double bandwidth_fwhm = 0.7;     // meV, spectral intensity FWHM
  double detuning = 0.0;           // meV, pump minus mean transition energy
  double retardance = units::pi / 2;  // rad; pi/2 circular, 0 or pi linear
  int helicity_sign = +1;

  bool operator==(const PulseParams&) const = default;
};

struct BathParams {
  double A_hyperfine = 0.1;  // meV
  int N_nuclei = 20000;
  double gamma_depol = 2e-2; // 1/s
  double n_window = 0.3;

  bool operator==(const BathParams&) const = default;
};

struct Numerics {
  // pulse propagator
  double window_tau = 20.0;          // half-width of the integration window in units of tau
  int initial_steps_per_tau = 16;
  int max_refinements = 10;
  double refine_tol = 1e-9;          // max-norm agreement between successive step halvings
  double unitarity_tol = 1e-9;

  // polarization grid
  double omega_min = units::two_pi * 0.1e9;  // rad/s, lowest admissible precession frequency

  // propagator cache
  bool use_cache = true;
  double cache_step_fraction = 1.0;  // cache spacing in units of the PSC spacing 2*pi/T_R
  double interp_tol = 1e-4;

  // drift curve sampling
  int drift_samples_per_psc = 50;

  // nuclear count used by scans unless full-N is requested
  int scan_N_nuclei = 2000;

  // stationary distribution
  double residual_tol = 1e-10;

  bool operator==(const Numerics&) const = default;
};

enum class ScanAxis { none, detuning, area, B_field, retardance };

std::string_view to_string(ScanAxis axis);
/// Throws std::invalid_argument for unknown names.
ScanAxis parse_scan_axis(std::string_view name);
units::Quantity axis_quantity(ScanAxis axis);

struct ScanSpec {
  ScanAxis axis = ScanAxis::none;
  std::vector<double> values;  // internal units of the axis

  bool operator==(const ScanSpec&) const = default;
};

struct OutputSpec {
  std::string path = "out";
  std::string format = "csv";

  bool operator==(const OutputSpec&) const = default;
};

struct SimulationConfig {
  DotParams dot;
  PulseParams pulse;
  BathParams bath;
  Numerics numerics;
  ScanSpec scan;
  OutputSpec output;

  bool operator==(const SimulationConfig&) const = default;
};

/// Reads a sectioned key-value file, applies `section.key=value` overrides and
/// validates. Missing numerics keys take their defaults.
/// Throws ConfigError naming the offending key (or file).
SimulationConfig load_config(const std::filesystem::path& path,
                             std::span<const std::string> overrides = {});

/// Same as load_config on in-memory text.
SimulationConfig parse_config(std::string_view text, std::span<const std::string> overrides = {});

/// Writes every field in canonical units; parse_config(serialize(c)) == c.
std::string serialize(const SimulationConfig& config);

/// Throws ConfigError for the first violated invariant.
void validate(const SimulationConfig& config);

/// Duration tau of the sech(t/tau) field envelope whose spectral intensity
/// FWHM equals `bandwidth_fwhm` (meV).
double pulse_duration_from_bandwidth(double bandwidth_fwhm);

/// Bare electron Larmor frequency g*mu_B*B/hbar in rad/s.
double zeeman_frequency(const DotParams& dot);

/// Electron precession frequency with nuclear polarization n, rad/s. A fully
/// polarized bath (n = 1) shifts the Zeeman energy by A.
/// Throws NonpositiveFrequency if the result does not exceed omega_min.
double precession_frequency(double n, const DotParams& dot, const BathParams& bath,
                            double omega_min = Numerics{}.omega_min);

/// Spacing 2*pi/T_R of the phase synchronization condition comb, rad/s.
inline double psc_spacing(const DotParams& dot) { return units::two_pi / dot.T_R; }

}  // namespace nufocus
