#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "nufocus/config.hpp"
#include "nufocus/errors.hpp"
#include "nufocus/propagator.hpp"

using namespace nufocus;

namespace {

using Matrix2c = Eigen::Matrix<Complex, 2, 2>;

PulseParams circular(double area, double detuning, double bandwidth = 0.7) {
  PulseParams p;
  p.area = area;
  p.detuning = detuning;
  p.bandwidth_fwhm = bandwidth;
  p.retardance = units::pi / 2;
  return p;
}

double rosen_zener(double area, double detuning, double tau) {
  const double s = std::sin(area / 2);
  const double sech = 1.0 / std::cosh(units::pi * detuning * tau / (2 * units::hbar));
  return s * s * sech * sech;
}

// Two-level |g>, |e> driven by Omega0 sech(t/tau)/2 with the excited level at
// -delta/hbar; midpoint exponentials with the closed-form 2x2 exponent.
double brute_force_two_level(double area, double detuning, double tau, int steps) {
  const double omega0 = area / (units::pi * tau);
  const double offset = -detuning / units::hbar;
  const double T = 40 * tau, h = 2 * T / steps;
  Eigen::Vector2cd psi(1, 0);
  for (int i = 0; i < steps; ++i) {
    const double t = -T + (i + 0.5) * h;
    const double c = 0.5 * omega0 / std::cosh(t / tau);
    // H = (offset/2) I + [[-offset/2, c], [c, offset/2]]
    const double bz = -0.5 * offset, bx = c, b = std::hypot(bx, bz);
    const Complex phase = std::polar(1.0, -0.5 * offset * h);
    const double cs = std::cos(b * h), sn = b > 0 ? std::sin(b * h) / b : h;
    Matrix2c u;
    u << Complex(cs, -sn * bz), Complex(0, -sn * bx), Complex(0, -sn * bx), Complex(cs, sn * bz);
    psi = phase * (u * psi);
  }
  return std::norm(psi[1]);
}

// Four-level rotating-frame Hamiltonian written out from the model definition.
Matrix4c reference_hamiltonian(double t, double omega_e, const PulseParams& p) {
  const double tau = pulse_duration_from_bandwidth(p.bandwidth_fwhm);
  const double c = p.area / (units::pi * tau) / std::cosh(t / tau) / (2 * std::sqrt(2.0));
  const Complex i(0, 1);
  const Complex e = std::exp(i * p.retardance);
  Complex ap = (1.0 - i * e) / 2.0, am = (1.0 + i * e) / 2.0;
  if (p.helicity_sign < 0) std::swap(ap, am);
  Matrix4c h = Matrix4c::Zero();
  h(0, 0) = omega_e / 2;
  h(1, 1) = -omega_e / 2;
  h(2, 2) = h(3, 3) = -p.detuning / units::hbar;
  h(2, 0) = c * ap;
  h(2, 1) = c * ap;
  h(3, 0) = c * am;
  h(3, 1) = -c * am;
  h(0, 2) = std::conj(h(2, 0));
  h(1, 2) = std::conj(h(2, 1));
  h(0, 3) = std::conj(h(3, 0));
  h(1, 3) = std::conj(h(3, 1));
  return h;
}

Matrix4c midpoint_exponential(const PulseParams& p, double omega_e, double half_window, int steps) {
  const double h = 2 * half_window / steps;
  Matrix4c u = Matrix4c::Identity();
  for (int i = 0; i < steps; ++i) {
    const double t = -half_window + (i + 0.5) * h;
    const Matrix4c step = (Complex(0, -h) * reference_hamiltonian(t, omega_e, p)).exp();
    u = step * u;
  }
  return u;
}

// Second-order scheme extrapolated to fourth order.
Matrix4c brute_force_four_level(const PulseParams& p, double omega_e, double half_window, int steps) {
  const Matrix4c a = midpoint_exponential(p, omega_e, half_window, steps);
  const Matrix4c b = midpoint_exponential(p, omega_e, half_window, 2 * steps);
  return (4.0 * b - a) / 3.0;
}

double trion_population(const Matrix4c& u, const Eigen::Vector4cd& in) {
  const Eigen::Vector4cd out = u * in;
  return std::norm(out[basis::trion_plus]) + std::norm(out[basis::trion_minus]);
}

}  // namespace

TEST_CASE("retardance to circular amplitudes") {
  auto a = retardance_to_circular(units::pi / 2, 1);
  CHECK(std::norm(a.a_plus) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::norm(a.a_minus) == doctest::Approx(0.0));
  a = retardance_to_circular(0.0, 1);
  CHECK(std::norm(a.a_plus) == doctest::Approx(0.5));
  CHECK(std::norm(a.a_minus) == doctest::Approx(0.5));
  // Jones calculus by hand: (1 + sin(pi/4))/2.
  a = retardance_to_circular(units::pi / 4, 1);
  CHECK(std::norm(a.a_plus) == doctest::Approx(0.8535533905932735).epsilon(1e-14));
  CHECK(std::norm(a.a_minus) == doctest::Approx(0.1464466094067262).epsilon(1e-14));
  const auto flipped = retardance_to_circular(units::pi / 4, -1);
  CHECK(flipped.a_plus == a.a_minus);
  CHECK(flipped.a_minus == a.a_plus);
  for (int i = 0; i <= 16; ++i) {
    const double phi = units::pi * i / 16;
    for (int h : {1, -1}) {
      const auto c = retardance_to_circular(phi, h);
      CHECK(std::norm(c.a_plus) + std::norm(c.a_minus) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::norm(c.a_plus) == doctest::Approx((1 + h * std::sin(phi)) / 2).epsilon(1e-12));
    }
  }
}

TEST_CASE("Hamiltonian structure") {
  const double tau = pulse_duration_from_bandwidth(0.7);
  const auto amps = retardance_to_circular(1.1, 1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 20; ++i) {
    const Matrix4c h = hamiltonian_at(u(rng) * tau, 7e10, 0.3, 3e12, tau, amps);
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  }
  // Pure sigma+: the |T-> row and column are uncoupled.
  const Matrix4c dark = hamiltonian_at(0.1 * tau, 7e10, 0.0, 3e12, tau, retardance_to_circular(units::pi / 2, 1));
  for (int k = 0; k < 4; ++k) {
    if (k == basis::trion_minus) continue;
    CHECK(std::abs(dark(basis::trion_minus, k)) < 1e-12 * 3e12);
    CHECK(std::abs(dark(k, basis::trion_minus)) < 1e-12 * 3e12);
  }
  // Window edges: coupling below 1e-4 of its peak beyond 10 tau.
  const Matrix4c edge = hamiltonian_at(10 * tau, 0.0, 0.0, 3e12, tau, amps);
  const Matrix4c peak = hamiltonian_at(0.0, 0.0, 0.0, 3e12, tau, amps);
  CHECK(std::abs(edge(2, 0)) < 1e-4 * std::abs(peak(2, 0)));
}

TEST_CASE("Hamiltonian matches the model written out independently") {
  const double tau = pulse_duration_from_bandwidth(0.7);
  PulseParams p = circular(0.7 * units::pi, -0.25);
  p.retardance = 0.4;
  p.helicity_sign = -1;
  for (double t : {-3.0, -0.2, 0.0, 1.7}) {
    const Matrix4c a = hamiltonian_at(t * tau, 6e10, p.detuning, rabi_peak(p.area, tau), tau,
                                      retardance_to_circular(p.retardance, p.helicity_sign));
    const Matrix4c b = reference_hamiltonian(t * tau, 6e10, p);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * b.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("zero area leaves only the free phases") {
  const auto p = circular(0.0, 0.4);
  const double w = 7.5e10;
  const auto u = propagate_pulse(p, w);
  CHECK((u.centered - Matrix4c::Identity()).cwiseAbs().maxCoeff() == 0.0);
  const double span = 2 * u.half_window;
  const double d[4] = {w / 2, -w / 2, -0.4 / units::hbar, -0.4 / units::hbar};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const Complex expect = r == c ? std::polar(1.0, -d[r] * span) : Complex(0);
      CHECK(std::abs(u.matrix(r, c) - expect) < 1e-12);
    }
  CHECK_THROWS_AS(excitation_asymmetry(u), NoExcitation);
}

TEST_CASE("Rosen-Zener formula agrees with brute-force two-level integration") {
  const double tau = pulse_duration_from_bandwidth(0.7);
  for (double area : {0.3 * units::pi, units::pi, 2 * units::pi})
    for (double delta : {0.0, 0.4, -0.4}) {
      const double bf = brute_force_two_level(area, delta, tau, 200000);
      CHECK(std::abs(bf - rosen_zener(area, delta, tau)) < 1e-7);
    }
  // Independently evaluated sech^2(pi delta tau / 2 hbar) at 0.4 meV.
  CHECK(rosen_zener(units::pi, 0.4, tau) == doctest::Approx(0.41533123649183063).epsilon(1e-12));
}

TEST_CASE("propagator reproduces Rosen-Zener in the two-level reduction") {
  const double tau = pulse_duration_from_bandwidth(0.7);
  const Eigen::Vector4cd z_plus(1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0, 0);
  const Eigen::Vector4cd z_minus(1 / std::sqrt(2.0), -1 / std::sqrt(2.0), 0, 0);
  for (double area : {0.3 * units::pi, units::pi, 2 * units::pi})
    for (double delta : {0.0, 0.4, -0.4}) {
      const auto u = propagate_pulse(circular(area, delta), 0.0);
      CHECK(std::abs(trion_population(u.matrix, z_plus) - rosen_zener(area, delta, tau)) < 1e-6);
      CHECK(trion_population(u.matrix, z_minus) < 1e-20);
    }
}

TEST_CASE("propagator agrees with an independent brute-force four-level integration") {
  struct Case {
    PulseParams p;
    double omega;
  };
  PulseParams elliptic = circular(0.3 * units::pi, 0.4);
  elliptic.retardance = units::pi / 4;
  PulseParams linear = circular(units::pi, -0.2);
  linear.retardance = 0.0;
  linear.helicity_sign = -1;
  for (const Case& c : {Case{circular(units::pi, 0.4), 7.56e10}, Case{elliptic, 7.56e10}, Case{linear, 3e10}}) {
    const auto u = propagate_pulse(c.p, c.omega);
    const Matrix4c ref = brute_force_four_level(c.p, c.omega, u.half_window, 40000);
    CHECK((u.matrix - ref).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("excitation asymmetry against frozen reference values") {
  // Reference: separate Magnus-4 / matrix-exponential implementation.
  const double w0 = 75629260468.087982;
  auto u = propagate_pulse(circular(units::pi, 0.4), w0);
  auto a = excitation_asymmetry(u);
  CHECK(a.alpha_plus == doctest::Approx(0.882842701129).epsilon(1e-9));
  CHECK(a.alpha_minus > a.alpha_plus);
  CHECK(std::abs(u.centered(2, 0)) == doctest::Approx(0.4297021444).epsilon(1e-9));
  CHECK(std::abs(u.centered(2, 1)) == doctest::Approx(0.4833737024).epsilon(1e-9));
  CHECK(std::abs(u.centered(2, 2)) == doctest::Approx(0.7626964867).epsilon(1e-9));

  a = excitation_asymmetry(propagate_pulse(circular(units::pi, -0.4), w0));
  CHECK(a.alpha_plus == doctest::Approx(1.117157298871).epsilon(1e-9));

  PulseParams ell = circular(0.3 * units::pi, 0.4);
  ell.retardance = units::pi / 4;
  u = propagate_pulse(ell, w0);
  CHECK(excitation_asymmetry(u).alpha_plus == doctest::Approx(0.903770451826).epsilon(1e-9));
  CHECK(std::abs(u.centered(2, 3)) == doctest::Approx(0.0015464025).epsilon(1e-6));
}

TEST_CASE("unitarity and alpha sum over random parameters") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 30; ++i) {
    PulseParams p;
    p.area = 2.5 * units::pi * u(rng) + 0.01;
    p.detuning = 3 * u(rng) - 1.5;
    p.retardance = units::pi * u(rng);
    p.helicity_sign = u(rng) < 0.5 ? 1 : -1;
    const double w = 2e11 * u(rng);
    const auto prop = propagate_pulse(p, w);
    CHECK(unitarity_defect(prop.matrix) < 1e-9);
    CHECK(unitarity_defect(prop.centered) < 1e-9);
    const auto a = excitation_asymmetry(prop);
    CHECK(a.alpha_plus + a.alpha_minus == 2.0);
    CHECK(prop.params_echo.omega_e == w);
    CHECK(prop.params_echo.detuning == p.detuning);
  }
}

TEST_CASE("detuning mirror exchanges the asymmetries") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 10; ++i) {
    PulseParams p = circular(units::pi * (0.2 + 1.5 * u(rng)), 1.2 * u(rng));
    p.retardance = units::pi * u(rng);
    const double w = 1.5e11 * u(rng);
    PulseParams m = p;
    m.detuning = -p.detuning;
    const auto a = excitation_asymmetry(propagate_pulse(p, w));
    const auto b = excitation_asymmetry(propagate_pulse(m, w));
    CHECK(std::abs(a.alpha_plus - b.alpha_minus) < 1e-6);
    CHECK(std::abs(a.alpha_minus - b.alpha_plus) < 1e-6);
  }
}

TEST_CASE("zero detuning excites both spin states equally") {
  for (double w : {1e10, 7.56e10, 1.5e11}) {
    const auto a = excitation_asymmetry(propagate_pulse(circular(units::pi, 0.0), w));
    CHECK(std::abs(a.alpha_plus - a.alpha_minus) < 1e-6);
  }
}

TEST_CASE("short pulses do not distinguish the spin states") {
  const auto a = excitation_asymmetry(propagate_pulse(circular(units::pi, 0.4, 20.0), 7.56e10));
  CHECK(std::abs(a.alpha_plus - a.alpha_minus) < 0.02);
}

TEST_CASE("RK4 step-halving error falls as h^4") {
  const auto p = circular(units::pi, 0.4);
  const double w = 7.56e10;
  const Matrix4c u1 = propagate_fixed_steps(p, w, 400);
  const Matrix4c u2 = propagate_fixed_steps(p, w, 800);
  const Matrix4c u3 = propagate_fixed_steps(p, w, 1600);
  const double e1 = (u1 - u2).cwiseAbs().maxCoeff();
  const double e2 = (u2 - u3).cwiseAbs().maxCoeff();
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("refinement failure raises NonUnitary") {
  IntegratorOptions opt;
  opt.max_refinements = 0;
  opt.initial_steps_per_tau = 1;
  CHECK_THROWS_AS(propagate_pulse(circular(units::pi, 0.4), 7.56e10, opt), NonUnitary);
}

TEST_CASE("batched propagation does not depend on the thread count") {
  std::vector<double> w;
  for (int i = 0; i < 11; ++i) w.push_back(6e10 + 2e9 * i);
  const auto p = circular(units::pi, 0.4);
  const auto a = propagate_pulses(p, w, {}, 1);
  const auto b = propagate_pulses(p, w, {}, 3);
  REQUIRE(a.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(a[i].matrix == b[i].matrix);
    CHECK((a[i].matrix - propagate_pulse(p, w[i]).matrix).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("propagator cache interpolates within budget") {
  const auto p = circular(units::pi, 0.4);
  const double psc = units::two_pi / 12.3e-9;
  const PropagatorCache cache(p, 6e10, 9e10, psc);
  CHECK(cache.size() == static_cast<std::size_t>(std::ceil(3e10 / psc)) + 1);
  const auto node = cache.at(6e10 + 3 * psc);
  CHECK((node.matrix - propagate_pulse(p, 6e10 + 3 * psc).matrix).cwiseAbs().maxCoeff() < 1e-8);
  std::vector<double> probes;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(6e10, 9e10);
  for (int i = 0; i < 12; ++i) probes.push_back(u(rng));
  const double err = cache.audit(probes);
  CHECK(err < 1e-4);
  for (double w : probes) CHECK(unitarity_defect(cache.at(w).matrix) < 1e-13);
  MESSAGE("cache interpolation error at one PSC spacing: " << err);
}

TEST_CASE("JSON dump lists the basis and 16 complex entries") {
  const auto u = propagate_pulse(circular(units::pi, 0.4), 7.56e10);
  const auto j = nlohmann::json::parse(propagator_to_json(u));
  CHECK(j["basis"] == nlohmann::json({"x+", "x-", "T+", "T-"}));
  REQUIRE(j["matrix"].size() == 16);
  CHECK(j["matrix"][2 * 4 + 1][0].get<double>() == u.matrix(2, 1).real());
  CHECK(j["matrix"][2 * 4 + 1][1].get<double>() == u.matrix(2, 1).imag());
  CHECK(j["unitarity_defect"].get<double>() < 1e-9);
}
