#include <algorithm>

#include "impl.hpp"

namespace nufocus::kernels {
namespace {

struct SingleLane {
  int lane;
  double load(const double* p) const { return p[lane]; }
  void store(double* p, double v) const { p[lane] = v; }
};

void propagate_scalar(const PulseDrive& drive, const double* omega_e, double h, long steps,
                      MatrixBlock& out) {
  for (int l = 0; l < lanes; ++l) propagate_impl<double>(drive, omega_e, h, steps, out, SingleLane{l});
}

void flip_rates_scalar(std::size_t n, const double* prefactor, const double* alpha_plus,
                       const double* alpha_minus, const double* rho_tt, const double* s_x,
                       double inv_T_R, double gamma, double* w_plus, double* w_minus) {
  for (std::size_t k = 0; k < n; ++k) {
    const double base = prefactor[k] * rho_tt[k] * inv_T_R;
    const double up = base * alpha_plus[k] * (1.0 + s_x[k]);
    const double down = base * alpha_minus[k] * (1.0 - s_x[k]);
    w_plus[k] = std::max(up, 0.0) + gamma;
    w_minus[k] = std::max(down, 0.0) + gamma;
  }
}

void flux_step_scalar(std::size_t n, const double* p, const double* up, const double* down, double dt,
                      double* flux, double* p_out) {
  if (n == 0) return;
  for (std::size_t k = 0; k + 1 < n; ++k) flux[k] = dt * (up[k] * p[k] - down[k + 1] * p[k + 1]);
  flux[n - 1] = 0.0;
  p_out[0] = p[0] - flux[0];
  for (std::size_t k = 1; k < n; ++k) p_out[k] = (p[k] - flux[k]) + flux[k - 1];
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::scalar, &propagate_scalar, &flip_rates_scalar, &flux_step_scalar};
  return table;
}

}  // namespace nufocus::kernels
