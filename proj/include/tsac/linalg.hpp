#pragma once

#include <Eigen/Dense>

namespace tsac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Largest singular value, computed as sqrt(lambda_max(M^T M)).
double spectral_norm(const Matrix& m);

/// Symmetric square root of an SPD matrix. Eigenvalues below 1e-12 are
/// clamped to 1e-12 before taking the root.
Matrix sym_sqrt(const Matrix& v);

/// Symmetric inverse square root, same eigenvalue clamp as sym_sqrt.
Matrix sym_inv_sqrt(const Matrix& v);

/// log det of an SPD matrix via Cholesky.
double log_det_spd(const Matrix& v);

double min_eigenvalue_sym(const Matrix& v);

/// Kronecker product, (A kron B) vec(X) = vec(B X A^T) with column-major vec.
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace tsac
