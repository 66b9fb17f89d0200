#include "nufocus/spin.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "nufocus/errors.hpp"
#include "nufocus/parallel.hpp"

namespace nufocus {
namespace {

using Matrix2c = Eigen::Matrix<Complex, 2, 2>;

// Pauli matrices in the (x+, x-) basis.
const Matrix2c& pauli(int axis) {
  static const Matrix2c m[3] = {
      (Matrix2c() << 1, 0, 0, -1).finished(),
      (Matrix2c() << 0, Complex(0, 1), Complex(0, -1), 0).finished(),
      (Matrix2c() << 0, 1, 1, 0).finished(),
  };
  return m[axis];
}

}  // namespace

PulseOutcome apply_pulse(const Propagator& u, const Vec3& s_in) {
  Matrix4c rho = Matrix4c::Zero();
  Matrix2c e = Matrix2c::Identity();
  for (int a = 0; a < 3; ++a) e += s_in[a] * pauli(a);
  rho.topLeftCorner<2, 2>() = 0.5 * e;

  const Matrix4c out = u.centered * rho * u.centered.adjoint();
  const Matrix2c electron = out.topLeftCorner<2, 2>();
  PulseOutcome r;
  for (int a = 0; a < 3; ++a) r.s[a] = (electron * pauli(a)).trace().real();
  r.trion_yield = out(basis::trion_plus, basis::trion_plus).real() +
                  out(basis::trion_minus, basis::trion_minus).real();
  return r;
}

InterpulseChannel InterpulseChannel::make(double omega_e, const DotParams& dot) {
  return {omega_e * dot.T_R, std::exp(-dot.T_R / dot.T2_electron)};
}

Vec3 InterpulseChannel::apply(const Vec3& s) const {
  const double c = std::cos(angle), sn = std::sin(angle);
  return {s[0], decay * (c * s[1] - sn * s[2]), decay * (sn * s[1] + c * s[2])};
}

InterpulseChannel::Populations InterpulseChannel::after_dump(const PulseOutcome& out) {
  const double trace = 1.0 - out.trion_yield;
  return {0.5 * (trace + out.s[0]) + 0.5 * out.trion_yield,
          0.5 * (trace - out.s[0]) + 0.5 * out.trion_yield};
}

double PeriodMap::spectral_radius() const {
  return Eigen::EigenSolver<Mat3>(M, false).eigenvalues().cwiseAbs().maxCoeff();
}

PeriodMap build_period_map(const Propagator& u, double omega_e, const DotParams& dot) {
  PeriodMap map;
  map.channel = InterpulseChannel::make(omega_e, dot);
  const PulseOutcome zero = apply_pulse(u, Vec3::Zero());
  map.trion_offset = zero.trion_yield;
  map.b = apply_pulse(u, map.channel.apply(Vec3::Zero())).s;
  for (int a = 0; a < 3; ++a) {
    const Vec3 unit = Vec3::Unit(a);
    map.M.col(a) = apply_pulse(u, map.channel.apply(unit)).s - map.b;
    map.trion_gradient[a] = apply_pulse(u, unit).trion_yield - zero.trion_yield;
  }
  return map;
}

BlochState steady_state(const PeriodMap& map) {
  BlochState st;
  if (map.spectral_radius() >= 1.0 - 1e-12) {
    if (map.b.cwiseAbs().maxCoeff() > 1e-14) {
      std::ostringstream msg;
      msg << "period map is not contractive (spectral radius " << map.spectral_radius()
          << ") but the pulse pumps spin; no unique steady state";
      throw NonContractive(msg.str());
    }
  } else {
    st.s = (Mat3::Identity() - map.M).partialPivLu().solve(map.b);
  }
  st.trion_yield = map.trion_yield(st.s);
  return st;
}

BlochState steady_state(const Propagator& u, double omega_e, const DotParams& dot) {
  return steady_state(build_period_map(u, omega_e, dot));
}

std::vector<BlochState> spin_vs_frequency(const PulseParams& pulse, const DotParams& dot,
                                          std::span<const double> omegas, const Numerics& numerics,
                                          int threads) {
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!(omegas[i] > numerics.omega_min)) {
      std::ostringstream msg;
      msg << "grid frequency " << omegas[i] << " rad/s does not exceed omega_min " << numerics.omega_min;
      throw NonpositiveFrequency(msg.str());
    }
    if (i > 0 && !(omegas[i] > omegas[i - 1])) throw std::invalid_argument("frequency grid must be strictly increasing");
  }
  const auto props = propagate_pulses(pulse, omegas, IntegratorOptions::from(numerics), threads);
  std::vector<BlochState> out(omegas.size());
  parallel_for(omegas.size(), threads, [&](std::size_t i) { out[i] = steady_state(props[i], omegas[i], dot); });
  return out;
}

}  // namespace nufocus
