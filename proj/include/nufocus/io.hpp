#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nufocus/config.hpp"
#include "nufocus/nuclear.hpp"
#include "nufocus/pipeline.hpp"
#include "nufocus/spin.hpp"

// CSV and JSON writers. Numbers are written in their shortest round-trip form
// so a rerun with the same config reproduces every file byte for byte. Failures to
// write throw ConfigError against output.path.
namespace nufocus::io {

/// Library version, "<semver>+g<git describe>" when built from a checkout.
std::string version();

/// 64-bit FNV-1a of the serialized config, as 16 hex digits.
std::string config_hash(const SimulationConfig& config);

/// omega_over_2pi_GHz, Sx, Sy, Sz, rho_TT (S = s/2)
void write_spin_csv(const std::filesystem::path& path, std::span<const double> omegas,
                    std::span<const BlochState> states);

/// n, w_plus, w_minus, alpha_plus, alpha_minus, Sx, rho_TT, drift
void write_rates_csv(const std::filesystem::path& path, const PolarizationGrid& grid, const FlipRates& rates);

/// n, P, omega_over_2pi_GHz
void write_distribution_csv(const std::filesystem::path& path, const PolarizationGrid& grid,
                            std::span<const double> p, std::span<const double> omegas);

/// <axis>_<unit>, mean_n, variance_n, freq_shift_GHz, amplitude, psc_coherence, status, distribution_ref
void write_observables_csv(const std::filesystem::path& path, ScanAxis axis, std::span<const ObservableRow> rows);

/// n, omega_over_2pi_GHz, w_plus, w_minus, drift
void write_drift_csv(const std::filesystem::path& path, std::span<const DriftSample> samples);

/// t_s, mean_n, variance_n
void write_evolution_csv(const std::filesystem::path& path, const PolarizationGrid& grid, const Trajectory& tr);

/// t_s, n, P for every recorded time
void write_trajectory_csv(const std::filesystem::path& path, const PolarizationGrid& grid, const Trajectory& tr);

void write_text(const std::filesystem::path& path, const std::string& text);

struct Manifest {
  std::string command;
  SimulationConfig config;
  int N_nuclei_used = 0;
  std::vector<std::string> outputs;  // paths relative to the manifest
  std::string kernels;               // active SIMD variant
};

std::string manifest_json(const Manifest& m);
void write_manifest(const std::filesystem::path& path, const Manifest& m);

}  // namespace nufocus::io
