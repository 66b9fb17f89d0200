#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nufocus/config.hpp"

namespace nufocus {

using Complex = std::complex<double>;
using Matrix4c = Eigen::Matrix<Complex, 4, 4>;

/// Ordered basis of the electron-trion system. |x+> and |x-> are the electron
/// spin eigenstates along the field (x); |T+> and |T-> are the trion states in
/// the optical (z) basis. |z+-> = (|x+> +- |x->)/sqrt2.
namespace basis {
inline constexpr int x_plus = 0;
inline constexpr int x_minus = 1;
inline constexpr int trion_plus = 2;
inline constexpr int trion_minus = 3;
}  // namespace basis

/// Pump field decomposed into sigma+ and sigma- components.
struct CircularAmplitudes {
  Complex a_plus;
  Complex a_minus;
};

/// Linear polarization at 45 degrees to a retarder's fast axis, after a
/// retardance phi: |a_pm|^2 = (1 +- helicity*sin(phi))/2.
CircularAmplitudes retardance_to_circular(double retardance, int helicity_sign);

/// Peak Rabi frequency Omega0 such that the integral of Omega0*sech(t/tau) is `area`.
inline double rabi_peak(double area, double tau) { return area / (units::pi * tau); }

/// Rotating-frame Hamiltonian (rad/s). Diagonal (+w/2, -w/2, -delta/hbar,
/// -delta/hbar); the sigma+ component couples |T+> to both |x+->, the sigma-
/// component couples |T-> to |x+> and, with opposite sign, |x->.
Matrix4c hamiltonian_at(double t, double omega_e, double detuning, double rabi_peak, double tau,
                        const CircularAmplitudes& amps);

struct PropagatorEcho {
  double omega_e = 0;    // rad/s
  double detuning = 0;   // meV
  double area = 0;       // rad
  double retardance = 0; // rad
  int helicity_sign = 1;
  double bandwidth_fwhm = 0;  // meV
};

struct Propagator {
  /// Time-ordered evolution over [-W*tau, +W*tau] in the rotating frame.
  Matrix4c matrix;
  /// `matrix` with the undriven evolution over each half window removed,
  /// i.e. the pulse referenced to its centre. Identity for a zero-area pulse.
  Matrix4c centered;
  PropagatorEcho params_echo;
  double half_window = 0;  // s
  long steps = 0;          // accepted RK4 step count (0 for interpolated entries)
};

struct IntegratorOptions {
  double window_tau = 20.0;
  int initial_steps_per_tau = 16;
  int max_refinements = 10;
  double refine_tol = 1e-9;
  double unitarity_tol = 1e-9;

  static IntegratorOptions from(const Numerics& n);
};

/// max |(U^H U - I)_ij|
double unitarity_defect(const Matrix4c& u);

/// Propagator across one sech pulse at precession frequency omega_e. The RK4
/// step is halved until successive results agree to refine_tol.
/// Throws NonUnitary if that never happens or the result is not unitary.
Propagator propagate_pulse(const PulseParams& pulse, double omega_e, const IntegratorOptions& options = {});

/// propagate_pulse for many frequencies, integrated `kernels::lanes` at a time.
/// Lanes in one batch share a step count, so results depend only on the
/// ordering of `omegas`, never on `threads`.
std::vector<Propagator> propagate_pulses(const PulseParams& pulse, std::span<const double> omegas,
                                         const IntegratorOptions& options = {}, int threads = 1);

/// Centered propagator from a single fixed-step RK4 run (no refinement).
Matrix4c propagate_fixed_steps(const PulseParams& pulse, double omega_e, long steps,
                               double window_tau = IntegratorOptions{}.window_tau);

struct ExcitationAsymmetry {
  double alpha_plus;
  double alpha_minus;
};

/// alpha_pm = 2 P_pm / (P_+ + P_-), with P_pm the trion population reached from
/// |x+->, summed over both trion states. alpha_+ + alpha_- == 2.
/// Throws NoExcitation if the pulse reaches no trion.
ExcitationAsymmetry excitation_asymmetry(const Propagator& u);

/// Row-major JSON dump with the basis order in the header.
std::string propagator_to_json(const Propagator& u);

/// Propagators on a uniform precession-frequency grid; lookups interpolate
/// the centered matrix linearly and restore the exact window phases.
class PropagatorCache {
 public:
  PropagatorCache(const PulseParams& pulse, double omega_lo, double omega_hi, double step,
                  const IntegratorOptions& options = {}, int threads = 1);

  Propagator at(double omega_e) const;

  std::size_t size() const { return nodes_.size(); }
  double omega_lo() const { return omega_lo_; }
  double step() const { return step_; }

  /// Largest max-norm difference between cached and directly integrated
  /// propagators over `omegas`.
  double audit(std::span<const double> omegas) const;

 private:
  PulseParams pulse_;
  IntegratorOptions options_;
  double omega_lo_;
  double step_;
  double tau_;
  std::vector<Propagator> nodes_;
};

}  // namespace nufocus
