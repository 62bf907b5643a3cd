#pragma once

#include "tsac/linalg.hpp"

namespace tsac {

struct RlsConfig {
  int n = 1;
  int d = 1;
  double mu = 1.0;       // regularizer, V_0 = mu I
  double sigma_w = 1.0;  // noise std entering beta_t
  double s_bound = 1.0;  // Frobenius bound S entering beta_t
  double delta = 0.05;   // confidence level

  void validate() const;  // throws std::invalid_argument
};

struct ConfidenceRadii {
  double beta = 0.0;     // RLS ellipsoid radius beta_t(delta)
  double upsilon = 0.0;  // sampling ellipsoid radius upsilon_t(delta)
};

/// Online regularized least squares for Theta with x_{t+1} = Theta^T z_t + w.
/// Maintains V_t = mu I + sum z z', the cross moment sum z x_next', and the
/// estimate Theta_hat = V^{-1} cross, refreshed by a dense SPD solve on every
/// update.
class RlsState {
 public:
  explicit RlsState(const RlsConfig& cfg);

  /// Rank-one update with the played covariate z = (x, u) and observed next
  /// state. Throws std::invalid_argument on shape/finiteness violations.
  void update(const Vector& z, const Vector& x_next);

  /// beta_t(delta) = sigma_w sqrt(2n log(det(V)^{1/2} / (delta det(mu I)^{1/2})))
  ///                 + sqrt(mu) S
  /// upsilon_t(delta) = beta_t * n sqrt((n+d) log(n(n+d)/delta))
  ConfidenceRadii confidence_radii() const;

  /// True iff ||V^{1/2}(theta - theta_hat)||_F <= beta_t(delta).
  bool in_confidence_set(const Matrix& theta) const;

  double min_eigenvalue_v() const;

  /// Symmetric V^{-1/2} (eigenvalues clamped at 1e-12); used by the sampler.
  Matrix v_inv_sqrt() const;

  const Matrix& v() const { return v_; }
  const Matrix& cross() const { return cross_; }
  const Matrix& theta_hat() const { return theta_hat_; }
  long t() const { return t_; }
  const RlsConfig& config() const { return cfg_; }
  int dim() const { return cfg_.n + cfg_.d; }

 private:
  RlsConfig cfg_;
  Matrix v_;          // (n+d) x (n+d)
  Matrix cross_;      // (n+d) x n
  Matrix theta_hat_;  // (n+d) x n
  long t_ = 0;
};

}  // namespace tsac
