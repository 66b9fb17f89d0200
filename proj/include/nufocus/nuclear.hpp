#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nufocus/config.hpp"
#include "nufocus/propagator.hpp"
#include "nufocus/spin.hpp"

namespace nufocus {

/// Nuclear polarization grid n_m = 2m/N for m in [m_lo, m_hi]; each step is a
/// single nuclear spin flip. n = 0 is always a grid point when it is admissible.
struct PolarizationGrid {
  int N = 0;
  long m_lo = 0;
  long m_hi = 0;

  std::size_t size() const { return static_cast<std::size_t>(m_hi - m_lo + 1); }
  double n(std::size_t k) const { return 2.0 * static_cast<double>(m_lo + static_cast<long>(k)) / N; }
  double step() const { return 2.0 / N; }
  /// Nuclei pointing up / down at grid point k: N(1 +- n)/2.
  double n_up(std::size_t k) const { return 0.5 * N + static_cast<double>(m_lo + static_cast<long>(k)); }
  double n_down(std::size_t k) const { return 0.5 * N - static_cast<double>(m_lo + static_cast<long>(k)); }
  std::vector<double> values() const;

  /// Symmetric window |n| <= n_window with N = bath.N_nuclei. Points whose
  /// precession frequency would not exceed omega_min are dropped from the low
  /// end. Throws NonpositiveFrequency if nothing admissible remains.
  static PolarizationGrid make(const BathParams& bath, const DotParams& dot, double omega_min);
  /// Unclipped window with an explicit N (tests).
  static PolarizationGrid symmetric(int N, double n_window);
};

/// Per-nucleus flip rates on a grid, with the inputs that produced them.
struct FlipRates {
  std::vector<double> w_plus;   // 1/s
  std::vector<double> w_minus;  // 1/s
  std::vector<double> alpha_plus;
  std::vector<double> alpha_minus;
  std::vector<double> s_x;      // after-pulse Bloch component (S_x = s_x/2)
  std::vector<double> rho_tt;
  std::vector<double> omega;    // rad/s

  std::size_t size() const { return w_plus.size(); }
};

/// w_pm = [A/(hbar omega N)]^2 alpha_pm (rho_TT/T_R)(1 +- 2 S_x) + gamma_d, the
/// optical part clamped at zero. `omegas`, `spin` and `alpha` are per grid point.
/// Throws MisalignedTables on length mismatch.
FlipRates flip_rates(const PolarizationGrid& grid, std::span<const double> omegas,
                     std::span<const BlochState> spin, std::span<const ExcitationAsymmetry> alpha,
                     const BathParams& bath, const DotParams& dot);

/// Hyperfine prefactor [A/(hbar omega N)]^2.
double flip_prefactor(double omega_e, const BathParams& bath, int N);

/// d(nbar)/dt = w+ - w- - n (w+ + w-)
inline double mean_drift(double n, double w_plus, double w_minus) {
  return w_plus - w_minus - n * (w_plus + w_minus);
}
std::vector<double> mean_drift(const PolarizationGrid& grid, const FlipRates& rates);

struct NuclearDistribution {
  std::vector<double> p;
};

/// Total transition rates of the chain: up[k] = N_down w+ (k -> k+1) and
/// down[k] = N_up w- (k -> k-1), zero across the window edges.
struct ChainRates {
  std::vector<double> up;
  std::vector<double> down;
};
ChainRates chain_rates(const PolarizationGrid& grid, const FlipRates& rates);

/// dP/dt of the master equation with reflecting window edges.
std::vector<double> apply_generator(const ChainRates& chain, std::span<const double> p);

/// max_k |(G p)_k| / max_k (outflow_k p_k)
double generator_residual(const ChainRates& chain, std::span<const double> p);

/// Stationary distribution from detailed balance, accumulated in log space.
/// Throws ZeroRate if a transition inside the window has a nonpositive rate,
/// NumericalError if the generator residual exceeds residual_tol.
NuclearDistribution steady_distribution(const PolarizationGrid& grid, const FlipRates& rates,
                                        double residual_tol = Numerics{}.residual_tol);

struct Trajectory {
  std::vector<double> t;  // s
  std::vector<NuclearDistribution> p;
};

/// Explicit flux-form evolution; records the state every `record_every` steps
/// (and always the first and last). Throws UnstableStep if dt times the
/// largest total outflow reaches 0.5.
Trajectory evolve_distribution(const PolarizationGrid& grid, const FlipRates& rates,
                               const NuclearDistribution& p0, double dt, long steps, long record_every = 1);

/// Largest stable dt for evolve_distribution.
double max_stable_dt(const ChainRates& chain);

struct Moments {
  double mean;
  double variance;
};
Moments moments(const PolarizationGrid& grid, std::span<const double> p);

/// Binomial distribution of N unbiased spins restricted to the grid and renormalized.
NuclearDistribution binomial_distribution(const PolarizationGrid& grid);

/// Unit mass at the grid point nearest n.
NuclearDistribution delta_distribution(const PolarizationGrid& grid, double n);

}  // namespace nufocus
