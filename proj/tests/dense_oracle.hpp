#pragma once

// Stationary distribution of the nuclear master equation from the null space
// of the dense generator, in 100-digit arithmetic so that tail entries many
// orders below the peak are resolved to full relative precision.

#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include "nufocus/nuclear.hpp"

namespace oracle {

using Real = boost::multiprecision::cpp_bin_float_100;

inline std::vector<double> dense_stationary(const nufocus::PolarizationGrid& g, const nufocus::FlipRates& r) {
  using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  const int n = static_cast<int>(g.size());
  Matrix Q = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const Real m = Real(g.m_lo + k);
    const Real n_down = Real(g.N) / 2 - m, n_up = Real(g.N) / 2 + m;
    if (k + 1 < n) {
      const Real rate = n_down * Real(r.w_plus[k]);
      Q(k + 1, k) += rate;
      Q(k, k) -= rate;
    }
    if (k > 0) {
      const Real rate = n_up * Real(r.w_minus[k]);
      Q(k - 1, k) += rate;
      Q(k, k) -= rate;
    }
  }
  const Matrix kernel = Eigen::FullPivLU<Matrix>(Q).kernel();
  Real sum = 0;
  for (int k = 0; k < n; ++k) sum += kernel(k, 0);
  std::vector<double> p(n);
  for (int k = 0; k < n; ++k) p[k] = static_cast<double>(kernel(k, 0) / sum);
  return p;
}

}  // namespace oracle
