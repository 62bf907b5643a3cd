#include "tsac/sampling.hpp"

#include <stdexcept>

namespace tsac {

TsGeometry geometry_of(const RlsState& state) {
  TsGeometry g;
  g.theta_hat = state.theta_hat();
  g.v_inv_sqrt = state.v_inv_sqrt();
  g.beta = state.confidence_radii().beta;
  g.n = state.config().n;
  g.d = state.config().d;
  return g;
}

Matrix ts_candidate(const TsGeometry& g, double scale, GaussianStream& rng) {
  Matrix eta = rng.matrix(g.n + g.d, g.n);
  return g.theta_hat + (scale * g.beta) * (g.v_inv_sqrt * eta);
}

Matrix ts_candidate(const RlsState& state, double scale, GaussianStream& rng) {
  return ts_candidate(geometry_of(state), scale, rng);
}

TsSampleResult ts_sample(const TsGeometry& g,
                         const StabilizabilityParams& params,
                         const CostMatrices& cost, GaussianStream& rng,
                         const TsSampleOptions& opt) {
  if (opt.max_attempts < 1)
    throw std::invalid_argument("ts_sample: max_attempts must be >= 1");
  if (opt.scale_levels < 0)
    throw std::invalid_argument("ts_sample: scale_levels must be >= 0");

  TsSampleResult res;
  int attempts = 0;
  double scale = 1.0;
  for (int level = 0; level <= opt.scale_levels; ++level) {
    for (int i = 0; i < opt.max_attempts; ++i) {
      ++attempts;
      Matrix theta = ts_candidate(g, scale, rng);
      SystemParams cand = SystemParams::from_theta(theta, g.n, g.d);
      if (membership_in_S(cand, cost, params, opt.dare).member) {
        res.status = SolveStatus::Ok;
        res.sample.theta = std::move(theta);
        res.sample.attempts = attempts;
        res.sample.scale_used = scale;
        return res;
      }
    }
    scale *= 0.5;
  }

  // Last resort: the center itself (scale 0).
  ++attempts;
  SystemParams center = SystemParams::from_theta(g.theta_hat, g.n, g.d);
  if (membership_in_S(center, cost, params, opt.dare).member) {
    res.status = SolveStatus::Ok;
    res.sample.theta = g.theta_hat;
    res.sample.attempts = attempts;
    res.sample.scale_used = 0.0;
    return res;
  }
  res.status = SolveStatus::NotStabilizable;
  res.sample.attempts = attempts;
  return res;
}

TsSampleResult ts_sample(const RlsState& state,
                         const StabilizabilityParams& params,
                         const CostMatrices& cost, GaussianStream& rng,
                         const TsSampleOptions& opt) {
  return ts_sample(geometry_of(state), params, cost, rng, opt);
}

OptimismCheck is_optimistic(const Matrix& theta, const SystemParams& true_sys,
                            const CostMatrices& cost, double sigma_w) {
  OptimismCheck out;
  DareOptions opt;
  opt.sigma_w = sigma_w;
  DareResult truth = solve_dare(true_sys, cost, opt);
  if (!truth.ok()) {
    out.status = truth.status;
    return out;
  }
  SystemParams sampled =
      SystemParams::from_theta(theta, true_sys.n(), true_sys.d());
  DareResult sample = solve_dare(sampled, cost, opt);
  if (!sample.ok()) {
    out.status = sample.status;
    return out;
  }
  out.status = SolveStatus::Ok;
  out.j_true = truth.sol.j;
  out.j_sample = sample.sol.j;
  out.optimistic = sample.sol.j <= truth.sol.j;
  return out;
}

double estimate_p_opt(const std::vector<TsSample>& samples, std::size_t lo,
                      std::size_t hi) {
  if (lo >= hi || hi > samples.size())
    throw std::invalid_argument("estimate_p_opt: empty window");
  std::size_t optimistic = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    if (!samples[i].optimistic.has_value())
      throw std::invalid_argument("estimate_p_opt: missing optimism flag");
    if (*samples[i].optimistic) ++optimistic;
  }
  return static_cast<double>(optimistic) / static_cast<double>(hi - lo);
}

}  // namespace tsac
