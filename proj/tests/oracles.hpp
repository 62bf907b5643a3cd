// Test-only oracles, independent of the library's solver paths.
#pragma once

#include <cmath>
#include <random>
#include <stdexcept>

#include "tsac/control.hpp"

namespace oracles {

using tsac::Matrix;
using tsac::Vector;

/// Scalar DARE via the quadratic formula: p solves
/// p = a^2 p + q - a^2 p^2 b^2 / (r + p b^2), equivalently
/// b^2 p^2 - (a^2 r - r + q b^2) p - q r = 0 for the positive root.
struct ScalarDare {
  double p;
  double k;
  double a_c;
};

inline ScalarDare scalar_dare(double a, double b, double q, double r) {
  const double A = b * b;
  const double B = -(a * a * r - r + q * b * b);
  const double C = -q * r;
  const double p = (-B + std::sqrt(B * B - 4 * A * C)) / (2 * A);
  const double k = -(p * a * b) / (r + p * b * b);
  return {p, k, a + b * k};
}

/// Independent fixed-point DARE oracle run to a tight tolerance.
inline Matrix fixed_point_dare(const Matrix& a, const Matrix& b,
                               const Matrix& q, const Matrix& r,
                               double tol = 1e-12, int max_iter = 2000000) {
  Matrix p = q;
  for (int i = 0; i < max_iter; ++i) {
    Matrix btp = b.transpose() * p;
    Matrix next = a.transpose() * p * a + q -
                  (btp * a).transpose() *
                      (r + btp * b).ldlt().solve(btp * a);
    next = 0.5 * (next + next.transpose()).eval();
    if ((next - p).norm() <= tol) return next;
    p = next;
  }
  throw std::runtime_error("fixed_point_dare oracle did not converge");
}

/// Spectral radius via Gelfand's formula with repeated squaring:
/// rho(M) = lim ||M^(2^s)||^(1/2^s). Eigenvalue-solver free; handles complex
/// dominant pairs that plain power iteration cannot.
inline double gelfand_rho(const Matrix& m, int squarings = 40) {
  double nrm = m.norm();
  if (nrm == 0.0) return 0.0;
  Matrix cur = m / nrm;
  long double log_scale = std::log(static_cast<long double>(nrm));
  long double k = 1.0L;
  for (int s = 0; s < squarings; ++s) {
    Matrix next = cur * cur;
    double n2 = next.norm();
    if (n2 == 0.0) return 0.0;  // nilpotent
    log_scale = 2.0L * log_scale + std::log(static_cast<long double>(n2));
    cur = next / n2;
    k *= 2.0L;
  }
  return static_cast<double>(std::exp(log_scale / k));
}

/// Truncated series L(A_c) = sigma_w^2 sum_t ||Q_*^(1/2) A_c^t||_F^2.
inline double series_L(const Matrix& a_c, const Matrix& q_star, double sigma_w,
                       int terms = 10000) {
  Matrix power = Matrix::Identity(a_c.rows(), a_c.cols());
  double sum = 0.0;
  for (int t = 0; t < terms; ++t) {
    sum += (power.transpose() * q_star * power).trace();
    power = a_c * power;
  }
  return sigma_w * sigma_w * sum;
}

/// Batch regularized least squares: solves (mu I + Z^T Z) Theta = Z^T X.
inline Matrix batch_rls(const Matrix& z_rows, const Matrix& x_rows,
                        double mu) {
  Matrix v = mu * Matrix::Identity(z_rows.cols(), z_rows.cols()) +
             z_rows.transpose() * z_rows;
  return v.ldlt().solve(z_rows.transpose() * x_rows);
}

}  // namespace oracles
