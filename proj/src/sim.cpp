#include "tsac/sim.hpp"

#include <cmath>
#include <stdexcept>

namespace tsac {

void PlantConfig::validate() const {
  sys.validate();
  cost.validate(sys.n(), sys.d());
  if (sigma_w <= 0.0)
    throw std::invalid_argument("PlantConfig: sigma_w must be > 0");
  if (x0.size() != 0 && (x0.size() != sys.n() || !x0.allFinite()))
    throw std::invalid_argument("PlantConfig: x0 must be a finite n-vector");
  if (divergence_guard <= 0.0)
    throw std::invalid_argument("PlantConfig: divergence_guard must be > 0");
}

PlantConfig boeing_plant() {
  PlantConfig cfg;
  cfg.sys.a.resize(4, 4);
  cfg.sys.a << 0.99, 0.03, -0.02, -0.32,
               0.01, 0.47,  4.70,  0.00,
               0.02, -0.06, 0.40,  0.00,
               0.01, -0.04, 0.72,  0.99;
  cfg.sys.b.resize(4, 2);
  cfg.sys.b <<  0.01, 0.99,
               -3.44, 1.66,
               -0.83, 0.44,
               -0.47, 0.25;
  cfg.cost.q = Matrix::Identity(4, 4);
  cfg.cost.r = Matrix::Identity(2, 2);
  cfg.sigma_w = 1.0;
  return cfg;
}

PlantStep plant_step(const PlantConfig& cfg, const Vector& x, const Vector& u,
                     GaussianStream& rng) {
  if (x.size() != cfg.sys.n() || u.size() != cfg.sys.d())
    throw std::invalid_argument("plant_step: dimension mismatch");
  if (!x.allFinite() || !u.allFinite())
    throw std::invalid_argument("plant_step: non-finite input");
  PlantStep out;
  Vector w = cfg.sigma_w * rng.vector(cfg.sys.n());
  out.x_next = cfg.sys.a * x + cfg.sys.b * u + w;
  out.cost = x.dot(cfg.cost.q * x) + u.dot(cfg.cost.r * u);
  out.diverged =
      !out.x_next.allFinite() || out.x_next.norm() > cfg.divergence_guard;
  return out;
}

RunLog run_episode(const PlantConfig& plant, Controller& controller,
                   long horizon, const DiagnosticsFlags& diag,
                   GaussianStream& plant_rng) {
  plant.validate();
  if (horizon < 1)
    throw std::invalid_argument("run_episode: horizon must be >= 1");

  RunLog log;
  log.controller = controller.name();
  log.seed = plant.seed;
  log.horizon = horizon;
  log.t_w = controller.t_w();
  log.tau0 = controller.tau0();

  DareOptions jopt;
  jopt.sigma_w = plant.sigma_w;
  DareResult star = solve_dare(plant.sys, plant.cost, jopt);
  if (!star.ok())
    throw std::invalid_argument("run_episode: true plant is not stabilizable");
  log.j_star = star.sol.j;
  const Matrix theta_star = plant.sys.theta();

  Vector x = plant.x0.size() ? plant.x0 : Vector::Zero(plant.sys.n());
  double cum_cost = 0.0;
  long post_tw_optimistic = 0;
  long post_tw_flagged = 0;
  long last_policy_index = -1;

  log.records.reserve(static_cast<std::size_t>(horizon));
  for (long t = 0; t < horizon; ++t) {
    Vector u = controller.act(x);

    StepRecord rec;
    rec.t = t;
    rec.x = x;
    rec.u = u;
    rec.policy_id = controller.policy_index();

    // Policy-boundary diagnostics.
    if (controller.policy_index() != last_policy_index) {
      last_policy_index = controller.policy_index();
      const auto& ev = controller.last_event();
      PolicyDiag pd;
      pd.policy_index = last_policy_index;
      pd.step = t;
      pd.lambda_min_v = controller.rls().min_eigenvalue_v();
      if (ev) {
        pd.model_refreshed = ev->model_refreshed;
        pd.attempts = ev->attempts;
        pd.scale_used = ev->scale_used;
        pd.search_failed = ev->search_failed;
        if (ev->j_valid) {
          pd.j_model = ev->j_model;
          pd.j_valid = true;
          if (diag.rts_trace) pd.rts_increment = ev->j_model - log.j_star;
          if (diag.optimism) {
            pd.optimistic = ev->j_model <= log.j_star;
            rec.optimistic = pd.optimistic;
            if (t > controller.t_w()) {
              ++post_tw_flagged;
              if (*pd.optimistic) ++post_tw_optimistic;
            }
          }
        }
      }
      log.policy_diags.push_back(std::move(pd));
    }

    PlantStep ps = plant_step(plant, x, u, plant_rng);
    cum_cost += ps.cost;

    rec.cost = ps.cost;
    rec.cum_regret = cum_cost - (t + 1) * log.j_star;
    rec.state_norm = x.norm();
    rec.est_error = spectral_norm(controller.rls().theta_hat() - theta_star);
    rec.lambda_min_v = controller.rls().min_eigenvalue_v();
    log.max_state_norm = std::max(log.max_state_norm, rec.state_norm);
    log.records.push_back(std::move(rec));
    ++log.steps;

    if (ps.diverged) {
      log.diverged = true;
      break;
    }
    controller.observe(x, u, ps.x_next);
    x = ps.x_next;
  }

  log.regret = cum_cost - log.steps * log.j_star;
  for (const auto& pd : log.policy_diags) {
    if (!pd.j_valid) continue;
    // Each sampled model is held for up to tau0 steps.
    log.rts_endpoint += pd.rts_increment;
  }
  log.post_tw_updates = post_tw_flagged;
  if (post_tw_flagged > 0)
    log.p_opt_post_tw =
        static_cast<double>(post_tw_optimistic) / post_tw_flagged;
  return log;
}

RunLog run_episode(const PlantConfig& plant, Controller& controller,
                   long horizon, const DiagnosticsFlags& diag) {
  GaussianStream plant_rng(substream_seed(plant.seed, Substream::Plant));
  return run_episode(plant, controller, horizon, diag, plant_rng);
}

}  // namespace tsac
