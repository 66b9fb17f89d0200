#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

// Inner loops with a scalar reference implementation and optional SIMD
// variants. All variants perform the same arithmetic in the same order (no
// fused multiply-add), so they agree to rounding and usually bit for bit.
namespace nufocus::kernels {

/// Number of precession frequencies integrated together by one propagate call.
inline constexpr int lanes = 4;

/// Drive shared by every lane of a propagate call.
struct PulseDrive {
  double tau = 0;            // s, sech envelope time constant
  double rabi_peak = 0;      // rad/s, Omega0
  double trion_offset = 0;   // rad/s, trion diagonal in the rotating frame (-delta/hbar)
  std::complex<double> a_plus{1, 0};
  std::complex<double> a_minus{0, 0};
  double t_start = 0;        // s
};

/// Up to `lanes` 4x4 complex matrices, structure-of-arrays: re[row*4+col][lane].
struct MatrixBlock {
  alignas(32) double re[16][lanes];
  alignas(32) double im[16][lanes];
};

/// RK4 integration of the interaction-picture propagator (relative to the
/// undriven diagonal Hamiltonian) from the identity at drive.t_start through
/// `steps` steps of size h, one lane per entry of omega_e[0..lanes).
using PropagateFn = void (*)(const PulseDrive& drive, const double* omega_e, double h, long steps,
                             MatrixBlock& out);

/// w_pm[k] = max(0, prefactor*alpha_pm*rho_tt*inv_T_R*(1 +- s_x)) + gamma
using FlipRatesFn = void (*)(std::size_t n, const double* prefactor, const double* alpha_plus,
                             const double* alpha_minus, const double* rho_tt, const double* s_x,
                             double inv_T_R, double gamma, double* w_plus, double* w_minus);

/// One explicit step of a nearest-neighbour birth-death chain with reflecting
/// ends. up[k] is the total rate k -> k+1, down[k] the total rate k -> k-1.
/// Probability moves as edge fluxes, so the sum is conserved to rounding.
/// `flux` is scratch of length n; p and p_out must not alias.
using FluxStepFn = void (*)(std::size_t n, const double* p, const double* up, const double* down,
                            double dt, double* flux, double* p_out);

enum class Isa { scalar, avx2 };

std::string_view name(Isa isa);

struct KernelTable {
  Isa isa;
  PropagateFn propagate;
  FlipRatesFn flip_rates;
  FluxStepFn flux_step;
};

const KernelTable& scalar_kernels();

/// nullptr when the build has no AVX2 variant.
const KernelTable* avx2_kernels();

bool cpu_has_avx2();

/// Kernels used by the library. Chosen once from the CPU, overridable with
/// NUFOCUS_SIMD=scalar|avx2.
const KernelTable& active();

/// Forces a variant (tests, benchmarks). Returns false if unavailable.
bool select(Isa isa);

}  // namespace nufocus::kernels
