#pragma once

#include <memory>
#include <optional>
#include <string>

#include "tsac/control.hpp"
#include "tsac/estimation.hpp"
#include "tsac/rng.hpp"
#include "tsac/sampling.hpp"

namespace tsac {

enum class ControllerKind { Tsac, TsLqr, Ofulq, Stabl, Cec };

const char* to_string(ControllerKind k);
std::optional<ControllerKind> controller_kind_from_string(const std::string& s);

struct PgdConfig {
  double step_scale = 1e-2;  // step = step_scale * beta_t / sqrt(lambda_min V)
  int iters = 50;
  double fd_step = 1e-5;     // central finite-difference step per entry
};

/// Shared configuration for the whole controller family. Optional fields are
/// resolved by finalize(): tau0 <- ceil(2 gamma^-1 log(2 kappa sqrt(2))),
/// sigma_nu <- sqrt(2) kappa sigma_w, t_w <- max(ceil(c sqrt(T) log T),
/// 10 (n+d)), mu <- (1 + kappa^2) X_s^2.
struct TsacConfig {
  StabilizabilityParams stab;
  CostMatrices cost;
  double sigma_w = 1.0;
  double delta = 0.05;
  long horizon = 200;

  std::optional<long> t_w;
  std::optional<long> tau0;
  std::optional<double> mu;
  std::optional<double> sigma_nu;
  double t_w_schedule_c = 0.5;

  /// Multiplier on beta_t for the sampling perturbation and the optimistic
  /// search radius. 1.0 is the theoretical radius; benchmark configs may
  /// shrink it toward the actual estimation error scale.
  double beta_scale = 1.0;

  TsSampleOptions sampling;
  PgdConfig pgd;

  static long default_tau0(double kappa, double gamma);
  static long default_t_w(long horizon, int n, int d, double c);

  /// State bound X_s = (12 kappa^2 + 2 kappa sqrt(2)) gamma^-1 sigma_w
  /// sqrt(2 n log(n (T - t_w) / delta)); the log argument is clamped below
  /// at e so the bound stays defined for short horizons.
  static double x_s_bound(const StabilizabilityParams& stab, double sigma_w,
                          int n, long horizon, long t_w, double delta);

  /// Exploration length sufficient for stabilization,
  /// 49 (beta_T + upsilon_T)^2 / (sigma_w min(sigma_w^2 n / (142 D^7),
  /// 1 / (54^2 D^10))). beta_T is evaluated through the standard determinant
  /// upper bound with covariate norm (1 + kappa^2)^{1/2} X_s. Diagnostic
  /// only; far beyond practical horizons at desk scale.
  static double t0_gate(const StabilizabilityParams& stab,
                        const CostMatrices& cost, double sigma_w, int n, int d,
                        long horizon, long t_w, double delta, double mu);
};

/// Fully-resolved per-run parameters.
struct ResolvedConfig {
  TsacConfig base;
  int n = 0;
  int d = 0;
  long t_w = 0;
  long tau0 = 1;
  double mu = 1.0;
  double sigma_nu = 0.0;
};

/// Fills defaults and validates invariants; throws std::invalid_argument.
ResolvedConfig finalize(const TsacConfig& cfg, int n, int d);

enum class Phase { ImprovedExploration, StabilizingTs };

/// Projected gradient descent for the lowest-cost model in the intersection
/// of the RLS ellipsoid and S. Finite-difference gradient of
/// J(Theta) = sigma_w^2 tr(P(Theta)); projection rescales the V-weighted
/// deviation back to radius beta_t. Returns the best feasible iterate, which
/// includes the center when feasible.
struct SearchResult {
  bool ok = false;  // false: no iterate passed membership
  Matrix theta;
  double j = 0.0;
  int dare_solves = 0;
};
SearchResult optimistic_search(const RlsState& state,
                               const StabilizabilityParams& params,
                               const CostMatrices& cost, const PgdConfig& pgd,
                               double sigma_w, double beta_scale = 1.0);

/// Raised when rejection sampling cannot reach S at any scale (misconfigured
/// kappa/gamma/S).
struct SamplingExhaustedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Base for the five controllers. All follow the same skeleton: hold the
/// current gain for tau0 steps, refresh the policy at every boundary, and
/// feed observations to the shared RLS estimator.
class Controller {
 public:
  virtual ~Controller() = default;

  /// One control decision. Resamples at policy boundaries; injects
  /// exploration noise in the improved-exploration phase (kind-dependent).
  Vector act(const Vector& x);

  /// Feed the transition actually played: z = (x, u), observed x_next.
  void observe(const Vector& x, const Vector& u, const Vector& x_next);

  ControllerKind kind() const { return kind_; }
  const char* name() const { return to_string(kind_); }
  const RlsState& rls() const { return rls_; }
  const Matrix& gain() const { return gain_; }
  long step() const { return step_; }
  long policy_age() const { return policy_age_; }
  long tau0() const { return rc_.tau0; }
  long t_w() const { return rc_.t_w; }
  long policy_index() const { return policy_index_; }
  Phase phase() const {
    return step_ <= rc_.t_w ? Phase::ImprovedExploration
                            : Phase::StabilizingTs;
  }
  const std::optional<TsSample>& current_sample() const { return sample_; }

  /// Diagnostics describing the most recent policy boundary.
  struct PolicyEvent {
    long step = 0;
    long policy_index = 0;
    bool model_refreshed = false;  // false: kept the previous gain
    Matrix theta;                  // model behind the gain when refreshed
    double j_model = 0.0;          // J(theta) at config sigma_w
    bool j_valid = false;
    int attempts = 0;
    double scale_used = 1.0;
    bool search_failed = false;    // OFULQ/StabL: PGD found no member
  };
  const std::optional<PolicyEvent>& last_event() const { return event_; }

 protected:
  Controller(ControllerKind kind, const ResolvedConfig& rc,
             std::uint64_t sampling_seed, std::uint64_t exploration_seed);

  /// Chooses the model/gain for the next tau0 steps and fills ev.
  virtual void refresh_policy(PolicyEvent& ev) = 0;

  /// Whether isotropic exploration noise is added at the current step.
  virtual bool injects_noise() const;

  /// Whether the gain term K x contributes (CEC warmup plays noise only).
  virtual bool uses_gain() const { return true; }

  void set_gain_from_theta(const Matrix& theta, PolicyEvent& ev);

  ControllerKind kind_;
  ResolvedConfig rc_;
  RlsState rls_;
  Matrix gain_;  // d x n
  std::optional<TsSample> sample_;
  long step_ = 0;
  long policy_age_ = 0;
  long policy_index_ = -1;
  std::optional<PolicyEvent> event_;
  GaussianStream sampling_rng_;
  GaussianStream exploration_rng_;
};

std::unique_ptr<Controller> make_controller(ControllerKind kind,
                                            const TsacConfig& cfg, int n,
                                            int d, std::uint64_t sampling_seed,
                                            std::uint64_t exploration_seed);

}  // namespace tsac
