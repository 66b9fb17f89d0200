#pragma once

#include <numbers>
#include <string>
#include <string_view>
#include <vector>

// Internal unit system used throughout the library:
//   energy      meV
//   time        s
//   field       T
//   rates       1/s
//   frequency   rad/s (angular) unless a name says otherwise
//   angles      rad
namespace nufocus::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduced Planck constant in meV*s (CODATA 2018).
inline constexpr double hbar = 6.582119569e-13;
/// Bohr magneton in meV/T (CODATA 2018).
inline constexpr double bohr_magneton = 5.7883818060e-2;

/// meV -> rad/s
constexpr double energy_to_angular(double energy_meV) { return energy_meV / hbar; }
/// rad/s -> meV
constexpr double angular_to_energy(double omega) { return omega * hbar; }
/// rad/s -> GHz (ordinary frequency)
constexpr double angular_to_GHz(double omega) { return omega / two_pi * 1e-9; }
constexpr double GHz_to_angular(double f_GHz) { return f_GHz * 1e9 * two_pi; }

enum class Quantity {
  dimensionless,
  count,
  energy,     // meV
  time,       // s
  field,      // T
  rate,       // 1/s
  frequency,  // stored as rad/s, written as ordinary frequency
  angle,      // rad
};

/// Parses "<number>[ ]<unit>" for the given quantity kind and returns the
/// value in internal units. A bare number is taken to already be in internal
/// units (ordinary Hz for frequencies). Throws std::invalid_argument.
double parse_quantity(std::string_view text, Quantity kind);

/// Formats a value in internal units with its canonical suffix so that
/// parse_quantity(format_quantity(v, k), k) == v exactly.
std::string format_quantity(double value, Quantity kind);

/// Unit label used in CSV headers ("meV", "T", "rad", ...).
std::string_view canonical_unit(Quantity kind);

/// Expands "start:stop:step" (inclusive) or a comma separated list into values
/// in internal units. Each element may carry a unit; a unit on the last element
/// also applies to the elements written without one ("0:1:0.25 pi").
std::vector<double> parse_value_list(std::string_view text, Quantity kind);

}  // namespace nufocus::units
