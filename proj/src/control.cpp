#include "tsac/control.hpp"

#include <cmath>
#include <stdexcept>

namespace tsac {

Matrix SystemParams::theta() const {
  Matrix th(n() + d(), n());
  th.topRows(n()) = a.transpose();
  th.bottomRows(d()) = b.transpose();
  return th;
}

SystemParams SystemParams::from_theta(const Matrix& theta, int n, int d) {
  if (theta.rows() != n + d || theta.cols() != n)
    throw std::invalid_argument("from_theta: expected (n+d) x n parameter");
  SystemParams sys;
  sys.a = theta.topRows(n).transpose();
  sys.b = theta.bottomRows(d).transpose();
  return sys;
}

double SystemParams::theta_fro_norm() const {
  return std::sqrt(a.squaredNorm() + b.squaredNorm());
}

void SystemParams::validate() const {
  if (a.rows() < 1 || a.rows() != a.cols())
    throw std::invalid_argument("SystemParams: A must be square, n >= 1");
  if (b.rows() != a.rows() || b.cols() < 1)
    throw std::invalid_argument("SystemParams: B must be n x d, d >= 1");
  if (!a.allFinite() || !b.allFinite())
    throw std::invalid_argument("SystemParams: non-finite entries");
}

namespace {
constexpr double kSymTol = 1e-10;
}

void CostMatrices::validate(int n, int d) const {
  if (q.rows() != n || q.cols() != n)
    throw std::invalid_argument("CostMatrices: Q must be n x n");
  if (r.rows() != d || r.cols() != d)
    throw std::invalid_argument("CostMatrices: R must be d x d");
  if (!q.allFinite() || !r.allFinite())
    throw std::invalid_argument("CostMatrices: non-finite entries");
  if ((q - q.transpose()).norm() > kSymTol ||
      (r - r.transpose()).norm() > kSymTol)
    throw std::invalid_argument("CostMatrices: Q, R must be symmetric");
  if (min_eigenvalue_sym(q) <= 0.0 || min_eigenvalue_sym(r) <= 0.0)
    throw std::invalid_argument("CostMatrices: Q, R must be positive definite");
}

double CostMatrices::alpha_bar() const {
  return std::max(spectral_norm(q), spectral_norm(r));
}

void StabilizabilityParams::validate() const {
  if (kappa < 1.0)
    throw std::invalid_argument("StabilizabilityParams: kappa must be >= 1");
  if (gamma <= 0.0 || gamma > 1.0)
    throw std::invalid_argument("StabilizabilityParams: gamma must be in (0,1]");
  if (s_bound <= 0.0)
    throw std::invalid_argument("StabilizabilityParams: s_bound must be > 0");
}

double StabilizabilityParams::p_norm_bound(double alpha_bar) const {
  return alpha_bar / gamma * kappa * kappa * (1.0 + kappa * kappa);
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Ok: return "Ok";
    case SolveStatus::NotStabilizable: return "NotStabilizable";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

const char* to_string(MembershipReason r) {
  switch (r) {
    case MembershipReason::Member: return "Member";
    case MembershipReason::FrobeniusBound: return "FrobeniusBound";
    case MembershipReason::NotStabilizable: return "NotStabilizable";
    case MembershipReason::GainBound: return "GainBound";
    case MembershipReason::SpectralRadius: return "SpectralRadius";
    case MembershipReason::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

namespace {

// One application of the Riccati map. Also yields the gain for the input P.
Matrix riccati_map(const Matrix& a, const Matrix& b, const Matrix& q,
                   const Matrix& r, const Matrix& p, Matrix* gain) {
  Matrix btp = b.transpose() * p;          // d x n
  Matrix m = r + btp * b;                  // d x d
  Eigen::LDLT<Matrix> ldlt(symmetrize(m));
  Matrix g = ldlt.solve(btp * a);          // (R+B'PB)^{-1} B'P A, d x n
  if (gain) *gain = -g;
  return symmetrize(a.transpose() * p * a + q -
                    (btp * a).transpose() * g);
}

}  // namespace

DareResult solve_dare(const SystemParams& sys, const CostMatrices& cost,
                      const DareOptions& opt) {
  sys.validate();
  cost.validate(sys.n(), sys.d());
  if (opt.tol <= 0.0) throw std::invalid_argument("solve_dare: tol must be > 0");
  if (opt.max_iter < 1)
    throw std::invalid_argument("solve_dare: max_iter must be >= 1");

  DareResult res;
  Matrix p = opt.warm_start ? symmetrize(*opt.warm_start) : cost.q;
  if (p.rows() != sys.n() || p.cols() != sys.n())
    throw std::invalid_argument("solve_dare: warm_start must be n x n");

  Matrix gain;
  for (int it = 1; it <= opt.max_iter; ++it) {
    Matrix next = riccati_map(sys.a, sys.b, cost.q, cost.r, p, &gain);
    if (!next.allFinite()) {
      res.status = SolveStatus::NumericalFailure;
      res.sol.iterations = it;
      return res;
    }
    if (next.trace() > opt.trace_guard) {
      res.status = SolveStatus::NotStabilizable;
      res.sol.iterations = it;
      return res;
    }
    double defect = (next - p).norm();
    if (defect <= opt.tol) {
      // The defect of p itself is ||p - f(p)|| = defect <= tol; report p.
      res.status = SolveStatus::Ok;
      res.sol.p = p;
      res.sol.k = gain;
      res.sol.j = opt.sigma_w * opt.sigma_w * p.trace();
      res.sol.iterations = it;
      res.sol.residual = defect;
      return res;
    }
    p = next;
  }
  res.status = SolveStatus::NotStabilizable;
  res.sol.iterations = opt.max_iter;
  return res;
}

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("spectral_radius: matrix must be square");
  if (!m.allFinite())
    throw std::invalid_argument("spectral_radius: non-finite entries");
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectral_radius: eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix closed_loop(const SystemParams& sys, const Matrix& k) {
  if (k.rows() != sys.d() || k.cols() != sys.n())
    throw std::invalid_argument("closed_loop: gain must be d x n");
  return sys.a + sys.b * k;
}

MembershipReport membership_in_S(const SystemParams& sys,
                                 const CostMatrices& cost,
                                 const StabilizabilityParams& params,
                                 const DareOptions& opt) {
  params.validate();
  MembershipReport rep;
  rep.theta_fro = sys.theta_fro_norm();
  if (rep.theta_fro > params.s_bound) {
    rep.reason = MembershipReason::FrobeniusBound;
    return rep;
  }
  DareResult dare = solve_dare(sys, cost, opt);
  if (!dare.ok()) {
    rep.reason = dare.status == SolveStatus::NumericalFailure
                     ? MembershipReason::NumericalFailure
                     : MembershipReason::NotStabilizable;
    return rep;
  }
  rep.gain_norm = spectral_norm(dare.sol.k);
  if (rep.gain_norm > params.kappa) {
    rep.reason = MembershipReason::GainBound;
    return rep;
  }
  rep.rho_cl = spectral_radius(closed_loop(sys, dare.sol.k));
  if (rep.rho_cl > 1.0 - params.gamma) {
    rep.reason = MembershipReason::SpectralRadius;
    return rep;
  }
  rep.member = true;
  rep.reason = MembershipReason::Member;
  return rep;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& rhs) {
  if (a.rows() != a.cols() || rhs.rows() != a.rows() || rhs.cols() != a.cols())
    throw std::invalid_argument("solve_lyapunov: dimension mismatch");
  const Eigen::Index n = a.rows();
  Matrix lhs = Matrix::Identity(n * n, n * n) - kron(a, a);
  Eigen::PartialPivLU<Matrix> lu(lhs);
  Vector vec_rhs = Eigen::Map<const Vector>(rhs.data(), n * n);
  Vector vec_x = lu.solve(vec_rhs);
  if (!vec_x.allFinite() || (lhs * vec_x - vec_rhs).norm() > 1e-6 * (1.0 + vec_rhs.norm()))
    throw std::runtime_error("solve_lyapunov: singular system (unstable A?)");
  Matrix x = Eigen::Map<Matrix>(vec_x.data(), n, n);
  return symmetrize(x);
}

ClosedLoopCost closed_loop_cost(const SystemParams& sys,
                                const CostMatrices& cost, const Matrix& k,
                                double sigma_w) {
  ClosedLoopCost out;
  Matrix a_c = closed_loop(sys, k);
  if (spectral_radius(a_c) >= 1.0) return out;
  Matrix qk = symmetrize(cost.q + k.transpose() * cost.r * k);
  // P_K solves P = A_c' P A_c + Q_K, i.e. a Lyapunov equation in A_c'.
  Matrix pk = solve_lyapunov(a_c.transpose(), qk);
  out.status = SolveStatus::Ok;
  out.j = sigma_w * sigma_w * pk.trace();
  return out;
}

GradLResult grad_L_at_optimum(const SystemParams& sys,
                              const CostMatrices& cost, double sigma_w) {
  GradLResult out;
  DareResult dare = solve_dare(sys, cost);
  if (!dare.ok()) {
    out.status = dare.status;
    return out;
  }
  Matrix a_c = closed_loop(sys, dare.sol.k);
  Matrix sigma = solve_lyapunov(
      a_c, sigma_w * sigma_w * Matrix::Identity(sys.n(), sys.n()));
  out.status = SolveStatus::Ok;
  out.grad = 2.0 * dare.sol.p * a_c * sigma;
  return out;
}

}  // namespace tsac
