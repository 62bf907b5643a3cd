#pragma once

#include <optional>
#include <string>

#include "tsac/linalg.hpp"

namespace tsac {

/// A linear plant x_{t+1} = A x_t + B u_t (+ noise). Theta^T = [A B].
struct SystemParams {
  Matrix a;  // n x n
  Matrix b;  // n x d

  int n() const { return static_cast<int>(a.rows()); }
  int d() const { return static_cast<int>(b.cols()); }

  /// Stacked parameter matrix of shape (n+d) x n.
  Matrix theta() const;
  static SystemParams from_theta(const Matrix& theta, int n, int d);

  /// Frobenius norm of [A B].
  double theta_fro_norm() const;

  /// Throws std::invalid_argument on shape mismatch or non-finite entries.
  void validate() const;
};

/// Quadratic stage cost x'Qx + u'Ru with Q, R symmetric positive definite.
struct CostMatrices {
  Matrix q;  // n x n
  Matrix r;  // d x d

  void validate(int n, int d) const;

  /// max(||Q||, ||R||), spectral norms.
  double alpha_bar() const;
};

/// Quantified stabilizability: the admissible set S is approximated by
/// ||Theta||_F <= s_bound, ||K(Theta)|| <= kappa, rho(A+BK) <= 1-gamma.
struct StabilizabilityParams {
  double kappa = 1.0;
  double gamma = 0.5;
  double s_bound = 1.0;

  void validate() const;

  /// Uniform bound on ||P(Theta)|| over the admissible set:
  /// D = alpha_bar * kappa^2 (1+kappa^2) / gamma.
  double p_norm_bound(double alpha_bar) const;
};

enum class SolveStatus {
  Ok,
  NotStabilizable,
  NumericalFailure,
};

const char* to_string(SolveStatus s);

struct RiccatiSolution {
  Matrix p;            // n x n, symmetric positive definite
  Matrix k;            // d x n optimal gain, u = K x
  double j = 0.0;      // sigma_w^2 * tr(P)
  int iterations = 0;
  double residual = 0.0;  // Frobenius norm of the Riccati defect
};

struct DareOptions {
  double tol = 1e-10;
  int max_iter = 100000;
  double trace_guard = 1e12;  // tr(P) above this => NotStabilizable
  double sigma_w = 1.0;       // noise std used for the cost j
  std::optional<Matrix> warm_start;  // initial P iterate; defaults to Q
};

struct DareResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  RiccatiSolution sol;

  bool ok() const { return status == SolveStatus::Ok; }
};

/// Fixed-point iteration P <- A'PA + Q - A'PB (R + B'PB)^{-1} B'PA starting
/// from P0 = Q, symmetrizing each iterate. Divergence (trace guard or budget
/// exhaustion) reports NotStabilizable; non-finite iterates report
/// NumericalFailure.
DareResult solve_dare(const SystemParams& sys, const CostMatrices& cost,
                      const DareOptions& opt = {});

/// Max |eigenvalue|. Throws std::invalid_argument for non-square or
/// non-finite input; std::runtime_error if the eigensolver fails.
double spectral_radius(const Matrix& m);

/// A + B K. Throws std::invalid_argument on dimension mismatch.
Matrix closed_loop(const SystemParams& sys, const Matrix& k);

enum class MembershipReason {
  Member,
  FrobeniusBound,
  NotStabilizable,
  GainBound,
  SpectralRadius,
  NumericalFailure,
};

const char* to_string(MembershipReason r);

struct MembershipReport {
  bool member = false;
  MembershipReason reason = MembershipReason::NumericalFailure;
  // Diagnostics; populated as far as the checks got.
  double theta_fro = 0.0;
  double gain_norm = 0.0;
  double rho_cl = 0.0;
};

/// Computable membership test for the admissible set S. Checks, in order:
/// Frobenius bound, DARE solvability, gain norm, closed-loop spectral radius.
/// The reason code names the first failed check.
MembershipReport membership_in_S(const SystemParams& sys,
                                 const CostMatrices& cost,
                                 const StabilizabilityParams& params,
                                 const DareOptions& opt = {});

/// Solves X - A X A^T = RHS for X (discrete Lyapunov), dense vectorized
/// solve; intended for small n. Throws std::runtime_error if the linear
/// system is singular (rho(A) >= 1).
Matrix solve_lyapunov(const Matrix& a, const Matrix& rhs);

/// Average cost of running the fixed gain K on the plant:
/// sigma_w^2 * tr(P_K) with P_K - A_c^T P_K A_c = Q + K'RK.
/// Status is NotStabilizable when rho(A+BK) >= 1.
struct ClosedLoopCost {
  SolveStatus status = SolveStatus::NotStabilizable;
  double j = 0.0;
};
ClosedLoopCost closed_loop_cost(const SystemParams& sys,
                                const CostMatrices& cost, const Matrix& k,
                                double sigma_w);

/// Jacobian of the closed-loop cost functional at the optimum:
/// 2 P A_c Sigma, with P the DARE solution, A_c = A + B K(Theta), and
/// Sigma - A_c Sigma A_c^T = sigma_w^2 I.
struct GradLResult {
  SolveStatus status = SolveStatus::NotStabilizable;
  Matrix grad;  // n x n
};
GradLResult grad_L_at_optimum(const SystemParams& sys,
                              const CostMatrices& cost, double sigma_w);

}  // namespace tsac
