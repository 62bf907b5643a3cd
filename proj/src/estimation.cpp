#include "tsac/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace tsac {

void RlsConfig::validate() const {
  if (n < 1 || d < 1)
    throw std::invalid_argument("RlsConfig: n, d must be >= 1");
  if (mu <= 0.0) throw std::invalid_argument("RlsConfig: mu must be > 0");
  if (sigma_w <= 0.0)
    throw std::invalid_argument("RlsConfig: sigma_w must be > 0");
  if (s_bound <= 0.0)
    throw std::invalid_argument("RlsConfig: s_bound must be > 0");
  if (delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("RlsConfig: delta must be in (0,1)");
}

RlsState::RlsState(const RlsConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int p = cfg_.n + cfg_.d;
  v_ = cfg_.mu * Matrix::Identity(p, p);
  cross_ = Matrix::Zero(p, cfg_.n);
  theta_hat_ = Matrix::Zero(p, cfg_.n);
}

void RlsState::update(const Vector& z, const Vector& x_next) {
  if (z.size() != dim() || x_next.size() != cfg_.n)
    throw std::invalid_argument("RlsState::update: dimension mismatch");
  if (!z.allFinite() || !x_next.allFinite())
    throw std::invalid_argument("RlsState::update: non-finite input");
  v_.noalias() += z * z.transpose();
  v_ = symmetrize(v_);
  cross_.noalias() += z * x_next.transpose();
  Eigen::LDLT<Matrix> ldlt(v_);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("RlsState::update: V factorization failed");
  theta_hat_ = ldlt.solve(cross_);
  if (!theta_hat_.allFinite())
    throw std::runtime_error("RlsState::update: estimate not finite");
  ++t_;
}

ConfidenceRadii RlsState::confidence_radii() const {
  const int p = dim();
  double log_det_ratio =
      0.5 * (log_det_spd(v_) - p * std::log(cfg_.mu)) + std::log(1.0 / cfg_.delta);
  if (!std::isfinite(log_det_ratio))
    throw std::runtime_error("confidence_radii: non-finite determinant");
  ConfidenceRadii out;
  out.beta = cfg_.sigma_w * std::sqrt(2.0 * cfg_.n * log_det_ratio) +
             std::sqrt(cfg_.mu) * cfg_.s_bound;
  out.upsilon = out.beta * cfg_.n *
                std::sqrt(p * std::log(cfg_.n * p / cfg_.delta));
  return out;
}

bool RlsState::in_confidence_set(const Matrix& theta) const {
  if (theta.rows() != dim() || theta.cols() != cfg_.n)
    throw std::invalid_argument("in_confidence_set: theta must be (n+d) x n");
  Matrix dev = theta - theta_hat_;
  double weighted = (sym_sqrt(v_) * dev).norm();
  return weighted <= confidence_radii().beta;
}

double RlsState::min_eigenvalue_v() const { return min_eigenvalue_sym(v_); }

Matrix RlsState::v_inv_sqrt() const { return sym_inv_sqrt(v_); }

}  // namespace tsac
