#include "tsac/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace tsac {

namespace {
constexpr double kEigClamp = 1e-12;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Matrix gram = m.transpose() * m;
  // Gram matrix is symmetric PSD; its top eigenvalue is sigma_max^2.
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(gram),
                                           Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectral_norm: eigensolver failed");
  double lmax = es.eigenvalues().maxCoeff();
  return std::sqrt(std::max(lmax, 0.0));
}

namespace {

Matrix sym_power(const Matrix& v, double exponent) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(v));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sym_power: eigensolver failed");
  Vector lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i)
    lam[i] = std::pow(std::max(lam[i], kEigClamp), exponent);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Matrix sym_sqrt(const Matrix& v) { return sym_power(v, 0.5); }

Matrix sym_inv_sqrt(const Matrix& v) { return sym_power(v, -0.5); }

double log_det_spd(const Matrix& v) {
  Eigen::LLT<Matrix> llt(symmetrize(v));
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log_det_spd: matrix not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double min_eigenvalue_sym(const Matrix& v) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(v),
                                           Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("min_eigenvalue_sym: eigensolver failed");
  return es.eigenvalues().minCoeff();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace tsac
