#include "tsac/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsac {

const char* to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::Tsac: return "tsac";
    case ControllerKind::TsLqr: return "ts_lqr";
    case ControllerKind::Ofulq: return "ofulq";
    case ControllerKind::Stabl: return "stabl";
    case ControllerKind::Cec: return "cec";
  }
  return "?";
}

std::optional<ControllerKind> controller_kind_from_string(
    const std::string& s) {
  if (s == "tsac") return ControllerKind::Tsac;
  if (s == "ts_lqr" || s == "ts-lqr") return ControllerKind::TsLqr;
  if (s == "ofulq") return ControllerKind::Ofulq;
  if (s == "stabl") return ControllerKind::Stabl;
  if (s == "cec") return ControllerKind::Cec;
  return std::nullopt;
}

long TsacConfig::default_tau0(double kappa, double gamma) {
  return static_cast<long>(
      std::ceil(2.0 / gamma * std::log(2.0 * kappa * std::sqrt(2.0))));
}

long TsacConfig::default_t_w(long horizon, int n, int d, double c) {
  double sched = c * std::sqrt(static_cast<double>(horizon)) *
                 std::log(static_cast<double>(horizon));
  long t_w = std::max(static_cast<long>(std::ceil(sched)),
                      10L * static_cast<long>(n + d));
  return std::min(t_w, horizon);
}

double TsacConfig::x_s_bound(const StabilizabilityParams& stab, double sigma_w,
                             int n, long horizon, long t_w, double delta) {
  double arg = n * static_cast<double>(horizon - t_w) / delta;
  double lead =
      (12.0 * stab.kappa * stab.kappa + 2.0 * stab.kappa * std::sqrt(2.0)) /
      stab.gamma;
  return lead * sigma_w *
         std::sqrt(2.0 * n * std::log(std::max(arg, std::exp(1.0))));
}

double TsacConfig::t0_gate(const StabilizabilityParams& stab,
                           const CostMatrices& cost, double sigma_w, int n,
                           int d, long horizon, long t_w, double delta,
                           double mu) {
  const double D = stab.p_norm_bound(cost.alpha_bar());
  const int p = n + d;
  double xs = x_s_bound(stab, sigma_w, n, horizon, t_w, delta);
  double cm2 = (1.0 + stab.kappa * stab.kappa) * xs * xs;
  // log det(V_T)/det(mu I) <= (n+d) log(1 + T c_m^2 / (mu (n+d)))
  double log_det_ratio =
      0.5 * p * std::log(1.0 + horizon * cm2 / (mu * p)) + std::log(1.0 / delta);
  double beta_T = sigma_w * std::sqrt(2.0 * n * log_det_ratio) +
                  std::sqrt(mu) * stab.s_bound;
  double upsilon_T = beta_T * n * std::sqrt(p * std::log(n * p / delta));
  double denom = sigma_w * std::min(sigma_w * sigma_w * n / (142.0 * std::pow(D, 7)),
                                    1.0 / (54.0 * 54.0 * std::pow(D, 10)));
  return 49.0 * (beta_T + upsilon_T) * (beta_T + upsilon_T) / denom;
}

ResolvedConfig finalize(const TsacConfig& cfg, int n, int d) {
  cfg.stab.validate();
  cfg.cost.validate(n, d);
  if (cfg.sigma_w <= 0.0)
    throw std::invalid_argument("TsacConfig: sigma_w must be > 0");
  if (cfg.delta <= 0.0 || cfg.delta >= 1.0)
    throw std::invalid_argument("TsacConfig: delta must be in (0,1)");
  if (cfg.horizon < 1)
    throw std::invalid_argument("TsacConfig: horizon must be >= 1");

  ResolvedConfig rc;
  rc.base = cfg;
  rc.n = n;
  rc.d = d;
  rc.tau0 = cfg.tau0.value_or(
      TsacConfig::default_tau0(cfg.stab.kappa, cfg.stab.gamma));
  rc.t_w = cfg.t_w.value_or(
      TsacConfig::default_t_w(cfg.horizon, n, d, cfg.t_w_schedule_c));
  rc.sigma_nu =
      cfg.sigma_nu.value_or(std::sqrt(2.0) * cfg.stab.kappa * cfg.sigma_w);
  if (!cfg.mu) {
    double xs = TsacConfig::x_s_bound(cfg.stab, cfg.sigma_w, n, cfg.horizon,
                                      rc.t_w, cfg.delta);
    rc.mu = (1.0 + cfg.stab.kappa * cfg.stab.kappa) * xs * xs;
  } else {
    rc.mu = *cfg.mu;
  }

  if (rc.tau0 < 1) throw std::invalid_argument("TsacConfig: tau0 must be >= 1");
  if (rc.t_w < 0 || rc.t_w > cfg.horizon)
    throw std::invalid_argument("TsacConfig: need 0 <= t_w <= horizon");
  if (rc.t_w > 0 && rc.sigma_nu <= 0.0)
    throw std::invalid_argument("TsacConfig: sigma_nu must be > 0 when t_w > 0");
  if (rc.mu <= 0.0) throw std::invalid_argument("TsacConfig: mu must be > 0");
  return rc;
}

namespace {

RlsConfig rls_config(const ResolvedConfig& rc) {
  RlsConfig r;
  r.n = rc.n;
  r.d = rc.d;
  r.mu = rc.mu;
  r.sigma_w = rc.base.sigma_w;
  r.s_bound = rc.base.stab.s_bound;
  r.delta = rc.base.delta;
  return r;
}

}  // namespace

Controller::Controller(ControllerKind kind, const ResolvedConfig& rc,
                       std::uint64_t sampling_seed,
                       std::uint64_t exploration_seed)
    : kind_(kind),
      rc_(rc),
      rls_(rls_config(rc)),
      gain_(Matrix::Zero(rc.d, rc.n)),
      sampling_rng_(sampling_seed),
      exploration_rng_(exploration_seed) {}

bool Controller::injects_noise() const { return false; }

void Controller::set_gain_from_theta(const Matrix& theta, PolicyEvent& ev) {
  SystemParams sys = SystemParams::from_theta(theta, rc_.n, rc_.d);
  DareOptions opt = rc_.base.sampling.dare;
  opt.sigma_w = rc_.base.sigma_w;
  DareResult dare = solve_dare(sys, rc_.base.cost, opt);
  if (!dare.ok()) {
    // Should not happen for a model that passed membership; retain the
    // previous gain rather than aborting a run.
    ev.model_refreshed = false;
    return;
  }
  gain_ = dare.sol.k;
  ev.model_refreshed = true;
  ev.theta = theta;
  ev.j_model = dare.sol.j;
  ev.j_valid = true;
}

Vector Controller::act(const Vector& x) {
  if (x.size() != rc_.n)
    throw std::invalid_argument("Controller::act: state has wrong dimension");
  if (!x.allFinite())
    throw std::invalid_argument("Controller::act: non-finite state");

  if (policy_age_ == 0) {
    PolicyEvent ev;
    ev.step = step_;
    ev.policy_index = ++policy_index_;
    refresh_policy(ev);
    event_ = std::move(ev);
  }

  Vector u = Vector::Zero(rc_.d);
  if (uses_gain()) u = gain_ * x;
  if (injects_noise()) u += rc_.sigma_nu * exploration_rng_.vector(rc_.d);

  policy_age_ = (policy_age_ + 1) % rc_.tau0;
  ++step_;
  return u;
}

void Controller::observe(const Vector& x, const Vector& u,
                         const Vector& x_next) {
  Vector z(rc_.n + rc_.d);
  z << x, u;
  rls_.update(z, x_next);
}

namespace {

/// TSAC (Algorithm 1) and TS-LQR (t_w = 0): Thompson sampling with rejection
/// onto S, fixed tau0 policy periods, isotropic exploration while t <= T_w.
class ThompsonController final : public Controller {
 public:
  ThompsonController(ControllerKind kind, const ResolvedConfig& rc,
                     std::uint64_t sampling_seed,
                     std::uint64_t exploration_seed)
      : Controller(kind, rc, sampling_seed, exploration_seed) {}

 protected:
  void refresh_policy(PolicyEvent& ev) override {
    TsGeometry g = geometry_of(rls_);
    g.beta *= rc_.base.beta_scale;
    TsSampleResult res = ts_sample(g, rc_.base.stab, rc_.base.cost,
                                   sampling_rng_, rc_.base.sampling);
    if (!res.ok())
      throw SamplingExhaustedError(
          "ts_sample: no member of S reachable; check kappa/gamma/s_bound");
    ev.attempts = res.sample.attempts;
    ev.scale_used = res.sample.scale_used;
    set_gain_from_theta(res.sample.theta, ev);
    if (ev.model_refreshed) sample_ = std::move(res.sample);
  }

  bool injects_noise() const override {
    return kind_ == ControllerKind::Tsac && rc_.t_w > 0 && step_ <= rc_.t_w;
  }
};

/// OFULQ and StabL: optimistic model via projected gradient descent on the
/// confidence ellipsoid; StabL adds the exploration noise of the first phase.
class OptimisticController final : public Controller {
 public:
  OptimisticController(ControllerKind kind, const ResolvedConfig& rc,
                       std::uint64_t sampling_seed,
                       std::uint64_t exploration_seed)
      : Controller(kind, rc, sampling_seed, exploration_seed) {}

 protected:
  void refresh_policy(PolicyEvent& ev) override {
    SearchResult res = optimistic_search(rls_, rc_.base.stab, rc_.base.cost,
                                         rc_.base.pgd, rc_.base.sigma_w);
    if (!res.ok) {
      // Fall back to the previous gain.
      ev.search_failed = true;
      ev.model_refreshed = false;
      return;
    }
    set_gain_from_theta(res.theta, ev);
  }

  bool injects_noise() const override {
    return kind_ == ControllerKind::Stabl && rc_.t_w > 0 && step_ <= rc_.t_w;
  }
};

/// Certainty equivalence: random-input warmup for t_w steps, then the optimal
/// gain of the point estimate, refreshed every tau0 steps.
class CecController final : public Controller {
 public:
  CecController(const ResolvedConfig& rc, std::uint64_t sampling_seed,
                std::uint64_t exploration_seed)
      : Controller(ControllerKind::Cec, rc, sampling_seed, exploration_seed) {}

 protected:
  void refresh_policy(PolicyEvent& ev) override {
    set_gain_from_theta(rls_.theta_hat(), ev);
  }

  bool in_warmup() const { return step_ < rc_.t_w; }

  bool injects_noise() const override { return in_warmup(); }
  bool uses_gain() const override { return !in_warmup(); }
};

}  // namespace

std::unique_ptr<Controller> make_controller(ControllerKind kind,
                                            const TsacConfig& cfg, int n,
                                            int d, std::uint64_t sampling_seed,
                                            std::uint64_t exploration_seed) {
  TsacConfig adjusted = cfg;
  // TS-LQR and OFULQ never use the improved-exploration phase.
  if (kind == ControllerKind::TsLqr || kind == ControllerKind::Ofulq)
    adjusted.t_w = 0;
  ResolvedConfig rc = finalize(adjusted, n, d);
  switch (kind) {
    case ControllerKind::Tsac:
    case ControllerKind::TsLqr:
      return std::make_unique<ThompsonController>(kind, rc, sampling_seed,
                                                  exploration_seed);
    case ControllerKind::Ofulq:
    case ControllerKind::Stabl:
      return std::make_unique<OptimisticController>(kind, rc, sampling_seed,
                                                    exploration_seed);
    case ControllerKind::Cec:
      return std::make_unique<CecController>(rc, sampling_seed,
                                             exploration_seed);
  }
  throw std::invalid_argument("make_controller: unknown kind");
}

SearchResult optimistic_search(const RlsState& state,
                               const StabilizabilityParams& params,
                               const CostMatrices& cost, const PgdConfig& pgd,
                               double sigma_w) {
  const int n = state.config().n;
  const int d = state.config().d;
  const double beta = state.confidence_radii().beta;
  const Matrix v_sqrt = sym_sqrt(state.v());

  DareOptions dare_opt;
  dare_opt.sigma_w = sigma_w;

  SearchResult best;
  int solves = 0;

  auto evaluate = [&](const Matrix& theta,
                      const Matrix* warm) -> std::optional<double> {
    SystemParams sys = SystemParams::from_theta(theta, n, d);
    DareOptions opt = dare_opt;
    if (warm) opt.warm_start = *warm;
    ++solves;
    DareResult res = solve_dare(sys, cost, opt);
    if (!res.ok()) return std::nullopt;
    return res.sol.j;
  };

  auto feasible = [&](const Matrix& theta) -> std::optional<double> {
    SystemParams sys = SystemParams::from_theta(theta, n, d);
    ++solves;
    MembershipReport rep = membership_in_S(sys, cost, params, dare_opt);
    if (!rep.member) return std::nullopt;
    return evaluate(theta, nullptr);
  };

  auto project = [&](Matrix theta) -> Matrix {
    Matrix dev = theta - state.theta_hat();
    double w = (v_sqrt * dev).norm();
    if (w > beta && w > 0.0) theta = state.theta_hat() + (beta / w) * dev;
    return theta;
  };

  auto consider = [&](const Matrix& theta) {
    if (auto j = feasible(theta); j && (!best.ok || *j < best.j)) {
      best.ok = true;
      best.theta = theta;
      best.j = *j;
    }
  };

  Matrix theta = state.theta_hat();
  consider(theta);

  double step = pgd.step_scale * beta / std::sqrt(std::max(
                    state.min_eigenvalue_v(), 1e-12));
  // Keep a warm start for the finite-difference probes around the iterate.
  std::optional<Matrix> p_center;

  for (int it = 0; it < pgd.iters; ++it) {
    // Gradient of J at the current iterate via central differences.
    SystemParams sys = SystemParams::from_theta(theta, n, d);
    ++solves;
    DareResult center = solve_dare(sys, cost, dare_opt);
    if (!center.ok()) {
      // Left the stabilizable region; restart from the incumbent.
      if (!best.ok) break;
      theta = best.theta;
      step *= 0.5;
      continue;
    }
    p_center = center.sol.p;

    Matrix grad = Matrix::Zero(n + d, n);
    bool grad_ok = true;
    for (int r = 0; r < n + d && grad_ok; ++r) {
      for (int c = 0; c < n; ++c) {
        Matrix probe = theta;
        probe(r, c) += pgd.fd_step;
        auto j_plus = evaluate(probe, &*p_center);
        probe(r, c) -= 2.0 * pgd.fd_step;
        auto j_minus = evaluate(probe, &*p_center);
        if (j_plus && j_minus) {
          grad(r, c) = (*j_plus - *j_minus) / (2.0 * pgd.fd_step);
        } else if (j_plus) {
          grad(r, c) = (*j_plus - center.sol.j) / pgd.fd_step;
        } else if (j_minus) {
          grad(r, c) = (center.sol.j - *j_minus) / pgd.fd_step;
        } else {
          grad_ok = false;
          break;
        }
      }
    }
    if (!grad_ok || grad.norm() == 0.0) break;

    theta = project(theta - step * grad);
    consider(theta);
  }

  best.dare_solves = solves;
  return best;
}

}  // namespace tsac
