#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tsac/control.hpp"
#include "tsac/controllers.hpp"
#include "tsac/rng.hpp"

namespace tsac {

struct PlantConfig {
  SystemParams sys;   // true Theta_*
  CostMatrices cost;
  double sigma_w = 1.0;
  Vector x0;          // defaults to zero when empty
  std::uint64_t seed = 0;
  double divergence_guard = 1e30;

  void validate() const;
};

/// Longitudinal flight of a linearized Boeing 747 (4 states, 2 inputs),
/// Q = I, R = I, unit noise.
PlantConfig boeing_plant();

struct PlantStep {
  Vector x_next;
  double cost = 0.0;     // cost of the current (x, u) pair
  bool diverged = false; // ||x_next|| exceeded the guard
};

PlantStep plant_step(const PlantConfig& cfg, const Vector& x, const Vector& u,
                     GaussianStream& rng);

struct StepRecord {
  long t = 0;
  Vector x;
  Vector u;
  double cost = 0.0;
  double cum_regret = 0.0;
  double state_norm = 0.0;
  long policy_id = 0;
  double est_error = 0.0;    // ||Theta_hat - Theta_*||, oracle diagnostic
  double lambda_min_v = 0.0;
  std::optional<bool> optimistic;  // set at policy updates with diagnostics on
};

struct PolicyDiag {
  long policy_index = 0;
  long step = 0;
  bool model_refreshed = false;
  double j_model = 0.0;
  bool j_valid = false;
  std::optional<bool> optimistic;
  double rts_increment = 0.0;  // J(model) - J(Theta_*), 0 when unknown
  double lambda_min_v = 0.0;
  int attempts = 0;
  double scale_used = 1.0;
  bool search_failed = false;
};

struct DiagnosticsFlags {
  bool optimism = true;   // flag policy updates as optimistic (extra DARE)
  bool rts_trace = true;  // accumulate the model-cost-gap trace
};

struct RunLog {
  std::string controller;
  std::uint64_t seed = 0;
  long horizon = 0;
  long steps = 0;          // executed steps (< horizon when diverged)
  bool diverged = false;
  double regret = 0.0;     // sum cost_t - steps * J(Theta_*)
  double max_state_norm = 0.0;
  double j_star = 0.0;     // J(Theta_*) at the plant's sigma_w
  double rts_endpoint = 0.0;  // sum over updates of J(model) - J*
  std::optional<double> p_opt_post_tw;
  long post_tw_updates = 0;
  long t_w = 0;    // resolved exploration horizon of the controller
  long tau0 = 0;   // resolved policy period
  std::vector<StepRecord> records;
  std::vector<PolicyDiag> policy_diags;
};

/// Runs the act -> plant -> observe loop for `horizon` steps (stopping early
/// on divergence, which is recorded rather than thrown). Regret is measured
/// against J(Theta_*) from the DARE on the true plant.
RunLog run_episode(const PlantConfig& plant, Controller& controller,
                   long horizon, const DiagnosticsFlags& diag,
                   GaussianStream& plant_rng);

/// Convenience wrapper that derives the plant substream from plant.seed.
RunLog run_episode(const PlantConfig& plant, Controller& controller,
                   long horizon, const DiagnosticsFlags& diag = {});

}  // namespace tsac
