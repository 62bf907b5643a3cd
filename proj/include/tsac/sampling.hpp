#pragma once

#include <optional>
#include <vector>

#include "tsac/control.hpp"
#include "tsac/estimation.hpp"
#include "tsac/rng.hpp"

namespace tsac {

struct TsSample {
  Matrix theta;            // (n+d) x n, passes membership_in_S
  int attempts = 0;        // total rejection rounds spent
  double scale_used = 1.0; // perturbation multiplier of the accepted draw
  std::optional<bool> optimistic;  // filled by diagnostics when truth is known
};

struct TsSampleOptions {
  int max_attempts = 1000;  // draws per scale level
  int scale_levels = 6;     // halvings tried after the full-scale budget
  DareOptions dare;         // membership solver settings
};

struct TsSampleResult {
  SolveStatus status = SolveStatus::NotStabilizable;  // Ok or NotStabilizable
  TsSample sample;

  bool ok() const { return status == SolveStatus::Ok; }
};

/// Sampling geometry decoupled from the estimator, for standalone
/// Monte-Carlo studies of the rejection sampler.
struct TsGeometry {
  Matrix theta_hat;    // (n+d) x n center
  Matrix v_inv_sqrt;   // (n+d) x (n+d) whitening factor
  double beta = 1.0;   // ellipsoid radius
  int n = 1;
  int d = 1;
};

TsGeometry geometry_of(const RlsState& state);

/// Pre-rejection candidate theta_hat + scale * beta_t V^{-1/2} eta with eta
/// an (n+d) x n matrix of independent standard normals.
Matrix ts_candidate(const TsGeometry& g, double scale, GaussianStream& rng);
Matrix ts_candidate(const RlsState& state, double scale, GaussianStream& rng);

/// Rejection sampling onto S: draws candidates at full scale, and after
/// max_attempts rejections halves the perturbation for up to scale_levels
/// rounds. If every level fails and theta_hat itself is not a member, the
/// result reports NotStabilizable (sampling exhausted).
TsSampleResult ts_sample(const TsGeometry& g,
                         const StabilizabilityParams& params,
                         const CostMatrices& cost, GaussianStream& rng,
                         const TsSampleOptions& opt = {});
TsSampleResult ts_sample(const RlsState& state,
                         const StabilizabilityParams& params,
                         const CostMatrices& cost, GaussianStream& rng,
                         const TsSampleOptions& opt = {});

struct OptimismCheck {
  SolveStatus status = SolveStatus::NotStabilizable;
  bool optimistic = false;
  double j_sample = 0.0;
  double j_true = 0.0;
};

/// True iff J(theta) <= J(Theta_*), both via the DARE at the same sigma_w.
OptimismCheck is_optimistic(const Matrix& theta, const SystemParams& true_sys,
                            const CostMatrices& cost, double sigma_w);

/// Empirical fraction of optimistic samples over the policy-update index
/// window [lo, hi). Throws std::invalid_argument if the window is empty or a
/// flag is missing.
double estimate_p_opt(const std::vector<TsSample>& samples, std::size_t lo,
                      std::size_t hi);

}  // namespace tsac
