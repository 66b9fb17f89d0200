// Kernel bodies shared by the scalar and SIMD translation units. Each TU
// instantiates them with its own vector type; everything here has internal
// linkage so differently-compiled copies never meet at link time.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>

#include "nufocus/kernels/kernels.hpp"

namespace nufocus::kernels {
namespace {

// Complex number over a lane type V (double, or a SIMD register wrapper).
template <class V>
struct CV {
  V re, im;
};

template <class V>
inline CV<V> operator+(const CV<V>& a, const CV<V>& b) { return {a.re + b.re, a.im + b.im}; }
template <class V>
inline CV<V> operator-(const CV<V>& a, const CV<V>& b) { return {a.re - b.re, a.im - b.im}; }
template <class V>
inline CV<V> operator*(const CV<V>& a, const CV<V>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class V>
inline CV<V> scale(const CV<V>& a, const V& s) { return {a.re * s, a.im * s}; }
template <class V>
inline CV<V> conj(const CV<V>& a) { return {a.re, V(0.0) - a.im}; }
// -i * a
template <class V>
inline CV<V> times_minus_i(const CV<V>& a) { return {a.im, V(0.0) - a.re}; }

template <class V>
inline CV<V> broadcast(std::complex<double> z) { return {V(z.real()), V(z.imag())}; }

// Basis rows: 0 = |x+>, 1 = |x->, 2 = |T+>, 3 = |T->.
template <class V>
struct Mat4 {
  CV<V> e[16];
};

struct StageCoefficients {
  std::complex<double> ca_plus, ca_minus;    // c(t) * a_pm
  std::complex<double> cca_plus, cca_minus;  // c(t) * conj(a_pm)
};

inline StageCoefficients coefficients_at(const PulseDrive& d, double t) {
  const double c = d.rabi_peak / std::cosh(t / d.tau) / (2.0 * std::sqrt(2.0));
  return {c * d.a_plus, c * d.a_minus, c * std::conj(d.a_plus), c * std::conj(d.a_minus)};
}

// out = -i * V_int(t) * y, where the interaction-picture coupling carries the
// phases e_pm = exp(i*(trion - x_pm)*t).
template <class V>
inline void derivative(const Mat4<V>& y, const StageCoefficients& k, const CV<V>& e_plus,
                       const CV<V>& e_minus, Mat4<V>& out) {
  const CV<V> ca_p = broadcast<V>(k.ca_plus), ca_m = broadcast<V>(k.ca_minus);
  const CV<V> cca_p = broadcast<V>(k.cca_plus), cca_m = broadcast<V>(k.cca_minus);
  const CV<V> ce_p = conj(e_plus), ce_m = conj(e_minus);
  for (int col = 0; col < 4; ++col) {
    const CV<V> u = e_plus * y.e[0 * 4 + col];
    const CV<V> v = e_minus * y.e[1 * 4 + col];
    const CV<V> p = cca_p * y.e[2 * 4 + col];
    const CV<V> q = cca_m * y.e[3 * 4 + col];
    out.e[0 * 4 + col] = times_minus_i(ce_p * (p + q));
    out.e[1 * 4 + col] = times_minus_i(ce_m * (p - q));
    out.e[2 * 4 + col] = times_minus_i(ca_p * (u + v));
    out.e[3 * 4 + col] = times_minus_i(ca_m * (u - v));
  }
}

template <class V>
inline void axpy(const Mat4<V>& x, const V& a, const Mat4<V>& k, Mat4<V>& out) {
  for (int i = 0; i < 16; ++i) out.e[i] = x.e[i] + scale(k.e[i], a);
}

// Lane access policy: Load/Store move `lanes` doubles between a V and memory.
template <class V, class Lanes>
void propagate_impl(const PulseDrive& d, const double* omega_e, double h, long steps, MatrixBlock& out,
                    const Lanes& io) {
  // Phase factors for the two electron states and their half-step rotors.
  double ep_re[lanes], ep_im[lanes], em_re[lanes], em_im[lanes];
  double rp_re[lanes], rp_im[lanes], rm_re[lanes], rm_im[lanes];
  for (int l = 0; l < lanes; ++l) {
    const double lambda_plus = d.trion_offset - 0.5 * omega_e[l];
    const double lambda_minus = d.trion_offset + 0.5 * omega_e[l];
    const auto ep = std::polar(1.0, lambda_plus * d.t_start);
    const auto em = std::polar(1.0, lambda_minus * d.t_start);
    const auto rp = std::polar(1.0, lambda_plus * 0.5 * h);
    const auto rm = std::polar(1.0, lambda_minus * 0.5 * h);
    ep_re[l] = ep.real(); ep_im[l] = ep.imag();
    em_re[l] = em.real(); em_im[l] = em.imag();
    rp_re[l] = rp.real(); rp_im[l] = rp.imag();
    rm_re[l] = rm.real(); rm_im[l] = rm.imag();
  }
  CV<V> e_plus{io.load(ep_re), io.load(ep_im)};
  CV<V> e_minus{io.load(em_re), io.load(em_im)};
  const CV<V> r_plus{io.load(rp_re), io.load(rp_im)};
  const CV<V> r_minus{io.load(rm_re), io.load(rm_im)};

  Mat4<V> u;
  for (int i = 0; i < 16; ++i) u.e[i] = {V((i % 5 == 0) ? 1.0 : 0.0), V(0.0)};

  Mat4<V> k1, k2, k3, k4, y;
  const V half_h(0.5 * h), full_h(h), sixth_h(h / 6.0), two(2.0);
  for (long s = 0; s < steps; ++s) {
    const double t = d.t_start + static_cast<double>(s) * h;
    const StageCoefficients c0 = coefficients_at(d, t);
    const StageCoefficients c1 = coefficients_at(d, t + 0.5 * h);
    const StageCoefficients c2 = coefficients_at(d, t + h);
    const CV<V> ep_mid = e_plus * r_plus, em_mid = e_minus * r_minus;
    const CV<V> ep_end = ep_mid * r_plus, em_end = em_mid * r_minus;

    derivative(u, c0, e_plus, e_minus, k1);
    axpy(u, half_h, k1, y);
    derivative(y, c1, ep_mid, em_mid, k2);
    axpy(u, half_h, k2, y);
    derivative(y, c1, ep_mid, em_mid, k3);
    axpy(u, full_h, k3, y);
    derivative(y, c2, ep_end, em_end, k4);
    for (int i = 0; i < 16; ++i) {
      const CV<V> sum = k1.e[i] + scale(k2.e[i] + k3.e[i], two) + k4.e[i];
      u.e[i] = u.e[i] + scale(sum, sixth_h);
    }
    e_plus = ep_end;
    e_minus = em_end;
  }
  for (int i = 0; i < 16; ++i) {
    io.store(out.re[i], u.e[i].re);
    io.store(out.im[i], u.e[i].im);
  }
}

}  // namespace
}  // namespace nufocus::kernels
