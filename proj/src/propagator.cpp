#include "nufocus/propagator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>
#include <json.hpp>

#include "nufocus/errors.hpp"
#include "nufocus/kernels/kernels.hpp"
#include "nufocus/parallel.hpp"

namespace nufocus {
namespace {

using kernels::lanes;

kernels::PulseDrive make_drive(const PulseParams& pulse, double tau, double half_window) {
  const auto amps = retardance_to_circular(pulse.retardance, pulse.helicity_sign);
  kernels::PulseDrive d;
  d.tau = tau;
  d.rabi_peak = rabi_peak(pulse.area, tau);
  d.trion_offset = -units::energy_to_angular(pulse.detuning);
  d.a_plus = amps.a_plus;
  d.a_minus = amps.a_minus;
  d.t_start = -half_window;
  return d;
}

Matrix4c lane_matrix(const kernels::MatrixBlock& block, int lane) {
  Matrix4c m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = Complex(block.re[r * 4 + c][lane], block.im[r * 4 + c][lane]);
  return m;
}

double max_abs_diff(const kernels::MatrixBlock& a, const kernels::MatrixBlock& b, int used) {
  double d = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int l = 0; l < used; ++l) d = std::max(d, std::hypot(a.re[i][l] - b.re[i][l], a.im[i][l] - b.im[i][l]));
  return d;
}

// Undriven diagonal in the rotating frame.
std::array<double, 4> free_diagonal(double omega_e, double detuning) {
  const double trion = -units::energy_to_angular(detuning);
  return {0.5 * omega_e, -0.5 * omega_e, trion, trion};
}

// matrix = exp(-iD W) * centered * exp(-iD W)
Matrix4c uncenter(const Matrix4c& centered, double omega_e, double detuning, double half_window) {
  const auto d = free_diagonal(omega_e, detuning);
  Matrix4c out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out(r, c) = std::polar(1.0, -(d[r] + d[c]) * half_window) * centered(r, c);
  return out;
}

PropagatorEcho echo(const PulseParams& pulse, double omega_e) {
  return {omega_e, pulse.detuning, pulse.area, pulse.retardance, pulse.helicity_sign, pulse.bandwidth_fwhm};
}

// Integrates up to `lanes` frequencies with a shared, jointly refined step.
std::array<Propagator, lanes> propagate_batch(const PulseParams& pulse, std::span<const double> omegas,
                                              const IntegratorOptions& opt) {
  const int used = static_cast<int>(omegas.size());
  double lane_omega[lanes];
  for (int l = 0; l < lanes; ++l) lane_omega[l] = omegas[std::min(l, used - 1)];

  const double tau = pulse_duration_from_bandwidth(pulse.bandwidth_fwhm);
  const double half_window = opt.window_tau * tau;
  const auto drive = make_drive(pulse, tau, half_window);
  const auto& k = kernels::active();

  long steps = std::max<long>(1, static_cast<long>(std::ceil(2.0 * opt.window_tau * opt.initial_steps_per_tau)));
  kernels::MatrixBlock coarse, fine;
  k.propagate(drive, lane_omega, 2.0 * half_window / static_cast<double>(steps), steps, coarse);

  bool converged = false;
  double diff = 0.0;
  for (int r = 0; r <= opt.max_refinements; ++r) {
    steps *= 2;
    k.propagate(drive, lane_omega, 2.0 * half_window / static_cast<double>(steps), steps, fine);
    diff = max_abs_diff(coarse, fine, used);
    if (diff <= opt.refine_tol) {
      converged = true;
      break;
    }
    coarse = fine;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "pulse propagator did not converge after " << opt.max_refinements
        << " step halvings (last change " << diff << ", tolerance " << opt.refine_tol << ")";
    throw NonUnitary(msg.str());
  }

  std::array<Propagator, lanes> out;
  for (int l = 0; l < used; ++l) {
    Propagator& p = out[l];
    p.centered = lane_matrix(fine, l);
    p.matrix = uncenter(p.centered, lane_omega[l], pulse.detuning, half_window);
    p.params_echo = echo(pulse, lane_omega[l]);
    p.half_window = half_window;
    p.steps = steps;
    const double defect = unitarity_defect(p.matrix);
    if (!(defect < opt.unitarity_tol)) {
      std::ostringstream msg;
      msg << "pulse propagator unitarity defect " << defect << " exceeds " << opt.unitarity_tol;
      throw NonUnitary(msg.str());
    }
  }
  return out;
}

}  // namespace

CircularAmplitudes retardance_to_circular(double retardance, int helicity_sign) {
  // Jones vector (1, e^{i phi})/sqrt2 in the retarder's (fast, slow) frame,
  // projected onto the two circular polarizations.
  const Complex ex(1.0 / std::sqrt(2.0), 0.0);
  const Complex ey = std::polar(1.0 / std::sqrt(2.0), retardance);
  const Complex i(0.0, 1.0);
  const Complex right = (ex - i * ey) / std::sqrt(2.0);
  const Complex left = (ex + i * ey) / std::sqrt(2.0);
  return helicity_sign >= 0 ? CircularAmplitudes{right, left} : CircularAmplitudes{left, right};
}

Matrix4c hamiltonian_at(double t, double omega_e, double detuning, double rabi_peak, double tau,
                        const CircularAmplitudes& amps) {
  const double c = rabi_peak / std::cosh(t / tau) / (2.0 * std::sqrt(2.0));
  const double trion = -units::energy_to_angular(detuning);
  Matrix4c h = Matrix4c::Zero();
  h(basis::x_plus, basis::x_plus) = 0.5 * omega_e;
  h(basis::x_minus, basis::x_minus) = -0.5 * omega_e;
  h(basis::trion_plus, basis::trion_plus) = trion;
  h(basis::trion_minus, basis::trion_minus) = trion;
  h(basis::trion_plus, basis::x_plus) = c * amps.a_plus;
  h(basis::trion_plus, basis::x_minus) = c * amps.a_plus;
  h(basis::trion_minus, basis::x_plus) = c * amps.a_minus;
  h(basis::trion_minus, basis::x_minus) = -c * amps.a_minus;
  for (int r = 2; r < 4; ++r)
    for (int col = 0; col < 2; ++col) h(col, r) = std::conj(h(r, col));
  return h;
}

IntegratorOptions IntegratorOptions::from(const Numerics& n) {
  return {n.window_tau, n.initial_steps_per_tau, n.max_refinements, n.refine_tol, n.unitarity_tol};
}

double unitarity_defect(const Matrix4c& u) {
  return (u.adjoint() * u - Matrix4c::Identity()).cwiseAbs().maxCoeff();
}

Propagator propagate_pulse(const PulseParams& pulse, double omega_e, const IntegratorOptions& options) {
  const double w[1] = {omega_e};
  return propagate_batch(pulse, w, options)[0];
}

std::vector<Propagator> propagate_pulses(const PulseParams& pulse, std::span<const double> omegas,
                                         const IntegratorOptions& options, int threads) {
  std::vector<Propagator> out(omegas.size());
  const std::size_t batches = (omegas.size() + lanes - 1) / lanes;
  parallel_for(batches, threads, [&](std::size_t b) {
    const std::size_t begin = b * lanes;
    const std::size_t count = std::min<std::size_t>(lanes, omegas.size() - begin);
    const auto res = propagate_batch(pulse, omegas.subspan(begin, count), options);
    for (std::size_t l = 0; l < count; ++l) out[begin + l] = res[l];
  });
  return out;
}

Matrix4c propagate_fixed_steps(const PulseParams& pulse, double omega_e, long steps, double window_tau) {
  const double tau = pulse_duration_from_bandwidth(pulse.bandwidth_fwhm);
  const double half_window = window_tau * tau;
  const auto drive = make_drive(pulse, tau, half_window);
  double w[lanes];
  std::fill(std::begin(w), std::end(w), omega_e);
  kernels::MatrixBlock block;
  kernels::active().propagate(drive, w, 2.0 * half_window / static_cast<double>(steps), steps, block);
  return lane_matrix(block, 0);
}

ExcitationAsymmetry excitation_asymmetry(const Propagator& u) {
  auto reached = [&](int from) {
    return std::norm(u.matrix(basis::trion_plus, from)) + std::norm(u.matrix(basis::trion_minus, from));
  };
  const double p_plus = reached(basis::x_plus);
  const double p_minus = reached(basis::x_minus);
  const double total = p_plus + p_minus;
  if (!(total > 1e-15)) {
    throw NoExcitation("pulse excites no trion (zero area or dark configuration)");
  }
  const double alpha_plus = 2.0 * p_plus / total;
  return {alpha_plus, 2.0 - alpha_plus};
}

std::string propagator_to_json(const Propagator& u) {
  auto dump = [](const Matrix4c& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) rows.push_back({m(r, c).real(), m(r, c).imag()});
    return rows;
  };
  nlohmann::json j;
  j["basis"] = {"x+", "x-", "T+", "T-"};
  j["layout"] = "row-major, 16 entries of [re, im]; entry (r, c) at index 4*r + c";
  j["omega_e_rad_per_s"] = u.params_echo.omega_e;
  j["omega_over_2pi_GHz"] = units::angular_to_GHz(u.params_echo.omega_e);
  j["detuning_meV"] = u.params_echo.detuning;
  j["area_rad"] = u.params_echo.area;
  j["retardance_rad"] = u.params_echo.retardance;
  j["helicity_sign"] = u.params_echo.helicity_sign;
  j["bandwidth_fwhm_meV"] = u.params_echo.bandwidth_fwhm;
  j["half_window_s"] = u.half_window;
  j["steps"] = u.steps;
  j["unitarity_defect"] = unitarity_defect(u.matrix);
  j["matrix"] = dump(u.matrix);
  j["centered"] = dump(u.centered);
  return j.dump(2);
}

PropagatorCache::PropagatorCache(const PulseParams& pulse, double omega_lo, double omega_hi, double step,
                                 const IntegratorOptions& options, int threads)
    : pulse_(pulse), options_(options), omega_lo_(omega_lo), step_(step) {
  if (!(step > 0) || !(omega_hi >= omega_lo)) throw std::invalid_argument("bad propagator cache range");
  tau_ = pulse_duration_from_bandwidth(pulse.bandwidth_fwhm);
  const auto intervals = std::max<long>(1, static_cast<long>(std::ceil((omega_hi - omega_lo) / step)));
  std::vector<double> omegas(static_cast<std::size_t>(intervals) + 1);
  for (std::size_t j = 0; j < omegas.size(); ++j) omegas[j] = omega_lo + static_cast<double>(j) * step;
  nodes_ = propagate_pulses(pulse, omegas, options, threads);
}

Propagator PropagatorCache::at(double omega_e) const {
  const double x = (omega_e - omega_lo_) / step_;
  const auto last = static_cast<long>(nodes_.size()) - 1;
  const long j = std::clamp(static_cast<long>(std::floor(x)), 0L, last - 1);
  const double f = x - static_cast<double>(j);

  // Entry-wise interpolation, then the nearest unitary (polar factor).
  const Matrix4c mix = (1.0 - f) * nodes_[j].centered + f * nodes_[j + 1].centered;
  const Eigen::JacobiSVD<Matrix4c> svd(mix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Propagator p;
  p.centered = svd.matrixU() * svd.matrixV().adjoint();
  p.half_window = options_.window_tau * tau_;
  p.matrix = uncenter(p.centered, omega_e, pulse_.detuning, p.half_window);
  p.params_echo = echo(pulse_, omega_e);
  p.steps = 0;
  return p;
}

double PropagatorCache::audit(std::span<const double> omegas) const {
  const auto exact = propagate_pulses(pulse_, omegas, options_);
  double worst = 0.0;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    worst = std::max(worst, (at(omegas[i]).matrix - exact[i].matrix).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace nufocus
