// Compiled with -mavx2; only reached after kernels::cpu_has_avx2().
#include <immintrin.h>

#include "impl.hpp"

namespace nufocus::kernels {
namespace {

// Four packed doubles; plain mul/add so results match the scalar path.
struct V4 {
  __m256d v;
  V4() = default;
  explicit V4(double x) : v(_mm256_set1_pd(x)) {}
  explicit V4(__m256d x) : v(x) {}
};
inline V4 operator+(V4 a, V4 b) { return V4(_mm256_add_pd(a.v, b.v)); }
inline V4 operator-(V4 a, V4 b) { return V4(_mm256_sub_pd(a.v, b.v)); }
inline V4 operator*(V4 a, V4 b) { return V4(_mm256_mul_pd(a.v, b.v)); }

struct PackedLanes {
  V4 load(const double* p) const { return V4(_mm256_loadu_pd(p)); }
  void store(double* p, V4 x) const { _mm256_storeu_pd(p, x.v); }
};

static_assert(lanes == 4, "AVX2 kernels pack exactly four doubles");

void propagate_avx2(const PulseDrive& drive, const double* omega_e, double h, long steps, MatrixBlock& out) {
  propagate_impl<V4>(drive, omega_e, h, steps, out, PackedLanes{});
}

void flip_rates_avx2(std::size_t n, const double* prefactor, const double* alpha_plus,
                     const double* alpha_minus, const double* rho_tt, const double* s_x, double inv_T_R,
                     double gamma, double* w_plus, double* w_minus) {
  const __m256d inv = _mm256_set1_pd(inv_T_R);
  const __m256d g = _mm256_set1_pd(gamma);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d base =
        _mm256_mul_pd(_mm256_mul_pd(_mm256_loadu_pd(prefactor + k), _mm256_loadu_pd(rho_tt + k)), inv);
    const __m256d sx = _mm256_loadu_pd(s_x + k);
    const __m256d up = _mm256_mul_pd(_mm256_mul_pd(base, _mm256_loadu_pd(alpha_plus + k)), _mm256_add_pd(one, sx));
    const __m256d dn = _mm256_mul_pd(_mm256_mul_pd(base, _mm256_loadu_pd(alpha_minus + k)), _mm256_sub_pd(one, sx));
    _mm256_storeu_pd(w_plus + k, _mm256_add_pd(_mm256_max_pd(up, zero), g));
    _mm256_storeu_pd(w_minus + k, _mm256_add_pd(_mm256_max_pd(dn, zero), g));
  }
  if (k < n) {
    scalar_kernels().flip_rates(n - k, prefactor + k, alpha_plus + k, alpha_minus + k, rho_tt + k, s_x + k,
                                inv_T_R, gamma, w_plus + k, w_minus + k);
  }
}

void flux_step_avx2(std::size_t n, const double* p, const double* up, const double* down, double dt,
                    double* flux, double* p_out) {
  if (n < 2) {
    scalar_kernels().flux_step(n, p, up, down, dt, flux, p_out);
    return;
  }
  const __m256d vdt = _mm256_set1_pd(dt);
  std::size_t k = 0;
  for (; k + 4 <= n - 1; k += 4) {
    const __m256d out = _mm256_mul_pd(_mm256_loadu_pd(up + k), _mm256_loadu_pd(p + k));
    const __m256d in = _mm256_mul_pd(_mm256_loadu_pd(down + k + 1), _mm256_loadu_pd(p + k + 1));
    _mm256_storeu_pd(flux + k, _mm256_mul_pd(vdt, _mm256_sub_pd(out, in)));
  }
  for (; k + 1 < n; ++k) flux[k] = dt * (up[k] * p[k] - down[k + 1] * p[k + 1]);
  flux[n - 1] = 0.0;

  p_out[0] = p[0] - flux[0];
  k = 1;
  for (; k + 4 <= n; k += 4) {
    const __m256d v = _mm256_sub_pd(_mm256_loadu_pd(p + k), _mm256_loadu_pd(flux + k));
    _mm256_storeu_pd(p_out + k, _mm256_add_pd(v, _mm256_loadu_pd(flux + k - 1)));
  }
  for (; k < n; ++k) p_out[k] = (p[k] - flux[k]) + flux[k - 1];
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{Isa::avx2, &propagate_avx2, &flip_rates_avx2, &flux_step_avx2};
  return &table;
}

}  // namespace nufocus::kernels
