#include "nufocus/nuclear.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nufocus/errors.hpp"
#include "nufocus/kernels/kernels.hpp"

namespace nufocus {

std::vector<double> PolarizationGrid::values() const {
  std::vector<double> v(size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = n(k);
  return v;
}

PolarizationGrid PolarizationGrid::symmetric(int N, double n_window) {
  const auto half = static_cast<long>(std::floor(0.5 * N * n_window + 1e-9));
  return {N, -half, half};
}

PolarizationGrid PolarizationGrid::make(const BathParams& bath, const DotParams& dot, double omega_min) {
  PolarizationGrid g = symmetric(bath.N_nuclei, bath.n_window);
  const double omega0 = zeeman_frequency(dot);
  const double per_m = 2.0 / g.N * units::energy_to_angular(bath.A_hyperfine);
  auto omega = [&](long m) { return omega0 + static_cast<double>(m) * per_m; };
  auto first = static_cast<long>(std::floor((omega_min - omega0) / per_m));
  while (!(omega(first) > omega_min)) ++first;
  while (omega(first - 1) > omega_min) --first;
  g.m_lo = std::max(g.m_lo, first);
  if (g.m_lo > g.m_hi) {
    std::ostringstream msg;
    msg << "no polarization in |n| <= " << bath.n_window << " keeps the precession frequency above "
        << units::angular_to_GHz(omega_min) << " GHz";
    throw NonpositiveFrequency(msg.str());
  }
  return g;
}

double flip_prefactor(double omega_e, const BathParams& bath, int N) {
  const double r = bath.A_hyperfine / (units::angular_to_energy(omega_e) * N);
  return r * r;
}

FlipRates flip_rates(const PolarizationGrid& grid, std::span<const double> omegas,
                     std::span<const BlochState> spin, std::span<const ExcitationAsymmetry> alpha,
                     const BathParams& bath, const DotParams& dot) {
  const std::size_t n = grid.size();
  if (omegas.size() != n || spin.size() != n || alpha.size() != n) {
    std::ostringstream msg;
    msg << "grid has " << n << " points but tables have " << omegas.size() << " frequencies, " << spin.size()
        << " spin states, " << alpha.size() << " asymmetries";
    throw MisalignedTables(msg.str());
  }
  FlipRates r;
  r.omega.assign(omegas.begin(), omegas.end());
  r.w_plus.resize(n);
  r.w_minus.resize(n);
  r.alpha_plus.resize(n);
  r.alpha_minus.resize(n);
  r.s_x.resize(n);
  r.rho_tt.resize(n);
  std::vector<double> prefactor(n);
  for (std::size_t k = 0; k < n; ++k) {
    prefactor[k] = flip_prefactor(omegas[k], bath, grid.N);
    r.alpha_plus[k] = alpha[k].alpha_plus;
    r.alpha_minus[k] = alpha[k].alpha_minus;
    r.s_x[k] = spin[k].s[0];
    r.rho_tt[k] = spin[k].trion_yield;
  }
  kernels::active().flip_rates(n, prefactor.data(), r.alpha_plus.data(), r.alpha_minus.data(), r.rho_tt.data(),
                               r.s_x.data(), 1.0 / dot.T_R, bath.gamma_depol, r.w_plus.data(),
                               r.w_minus.data());
  return r;
}

std::vector<double> mean_drift(const PolarizationGrid& grid, const FlipRates& rates) {
  std::vector<double> d(grid.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = mean_drift(grid.n(k), rates.w_plus[k], rates.w_minus[k]);
  return d;
}

ChainRates chain_rates(const PolarizationGrid& grid, const FlipRates& rates) {
  const std::size_t n = grid.size();
  if (rates.size() != n) throw MisalignedTables("flip rate table does not match the polarization grid");
  ChainRates c{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    c.up[k] = k + 1 < n ? grid.n_down(k) * rates.w_plus[k] : 0.0;
    c.down[k] = k > 0 ? grid.n_up(k) * rates.w_minus[k] : 0.0;
  }
  return c;
}

std::vector<double> apply_generator(const ChainRates& c, std::span<const double> p) {
  const std::size_t n = p.size();
  std::vector<double> dp(n);
  for (std::size_t k = 0; k < n; ++k) {
    double v = -(c.up[k] + c.down[k]) * p[k];
    if (k > 0) v += c.up[k - 1] * p[k - 1];
    if (k + 1 < n) v += c.down[k + 1] * p[k + 1];
    dp[k] = v;
  }
  return dp;
}

double generator_residual(const ChainRates& c, std::span<const double> p) {
  const auto dp = apply_generator(c, p);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    num = std::max(num, std::abs(dp[k]));
    den = std::max(den, (c.up[k] + c.down[k]) * p[k]);
  }
  return den > 0 ? num / den : num;
}

NuclearDistribution steady_distribution(const PolarizationGrid& grid, const FlipRates& rates, double residual_tol) {
  const ChainRates c = chain_rates(grid, rates);
  const std::size_t n = grid.size();
  std::vector<double> logp(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (!(c.up[k] > 0) || !(c.down[k + 1] > 0)) {
      std::ostringstream msg;
      msg << "nonpositive transition rate between n = " << grid.n(k) << " and n = " << grid.n(k + 1)
          << " (w+ = " << rates.w_plus[k] << ", w- = " << rates.w_minus[k + 1] << ")";
      throw ZeroRate(msg.str());
    }
    logp[k + 1] = logp[k] + std::log(c.up[k]) - std::log(c.down[k + 1]);
  }
  const double top = *std::max_element(logp.begin(), logp.end());
  NuclearDistribution d{std::vector<double>(n)};
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += d.p[k] = std::exp(logp[k] - top);
  for (double& v : d.p) v /= sum;

  const double residual = generator_residual(c, d.p);
  if (!(residual < residual_tol)) {
    std::ostringstream msg;
    msg << "stationary distribution residual " << residual << " exceeds " << residual_tol;
    throw NumericalError("Residual", msg.str());
  }
  return d;
}

double max_stable_dt(const ChainRates& c) {
  double worst = 0.0;
  for (std::size_t k = 0; k < c.up.size(); ++k) worst = std::max(worst, c.up[k] + c.down[k]);
  return worst > 0 ? 0.5 / worst : HUGE_VAL;
}

Trajectory evolve_distribution(const PolarizationGrid& grid, const FlipRates& rates, const NuclearDistribution& p0,
                               double dt, long steps, long record_every) {
  const ChainRates c = chain_rates(grid, rates);
  const std::size_t n = grid.size();
  if (p0.p.size() != n) throw MisalignedTables("initial distribution does not match the polarization grid");
  const double limit = max_stable_dt(c);
  if (!(dt > 0) || !(dt < limit)) {
    std::ostringstream msg;
    msg << "time step " << dt << " s is not in (0, " << limit << ") s";
    throw UnstableStep(msg.str(), limit);
  }
  record_every = std::max<long>(1, record_every);

  const auto& k = kernels::active();
  Trajectory tr;
  tr.t.push_back(0.0);
  tr.p.push_back(p0);
  std::vector<double> p = p0.p, next(n), flux(n);
  for (long s = 1; s <= steps; ++s) {
    k.flux_step(n, p.data(), c.up.data(), c.down.data(), dt, flux.data(), next.data());
    p.swap(next);
    if (s % record_every == 0 || s == steps) {
      tr.t.push_back(static_cast<double>(s) * dt);
      tr.p.push_back({p});
    }
  }
  return tr;
}

Moments moments(const PolarizationGrid& grid, std::span<const double> p) {
  double mass = 0.0, mean = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    mass += p[k];
    mean += p[k] * grid.n(k);
  }
  mean /= mass;
  double var = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = grid.n(k) - mean;
    var += p[k] * d * d;
  }
  return {mean, var / mass};
}

NuclearDistribution binomial_distribution(const PolarizationGrid& grid) {
  const std::size_t n = grid.size();
  std::vector<double> logp(n);
  for (std::size_t k = 0; k < n; ++k) {
    logp[k] = std::lgamma(grid.N + 1.0) - std::lgamma(grid.n_up(k) + 1.0) - std::lgamma(grid.n_down(k) + 1.0);
  }
  const double top = *std::max_element(logp.begin(), logp.end());
  NuclearDistribution d{std::vector<double>(n)};
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += d.p[k] = std::exp(logp[k] - top);
  for (double& v : d.p) v /= sum;
  return d;
}

NuclearDistribution delta_distribution(const PolarizationGrid& grid, double n) {
  NuclearDistribution d{std::vector<double>(grid.size(), 0.0)};
  const double x = std::round((n - grid.n(0)) / grid.step());
  d.p[static_cast<std::size_t>(std::clamp(x, 0.0, static_cast<double>(grid.size() - 1)))] = 1.0;
  return d;
}

}  // namespace nufocus
