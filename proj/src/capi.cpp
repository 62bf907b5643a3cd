#include "tsac/tsac.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "tsac/bench.hpp"
#include "tsac/control.hpp"
#include "tsac/controllers.hpp"
#include "tsac/estimation.hpp"
#include "tsac/sim.hpp"

using namespace tsac;

namespace {

thread_local std::string g_last_error;

tsac_status fail(tsac_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

tsac_status from_solve_status(SolveStatus s, const char* what) {
  switch (s) {
    case SolveStatus::Ok:
      return TSAC_OK;
    case SolveStatus::NotStabilizable:
      return fail(TSAC_ERR_NOT_STABILIZABLE,
                  std::string(what) + ": not stabilizable");
    case SolveStatus::NumericalFailure:
      return fail(TSAC_ERR_NUMERICAL, std::string(what) + ": numerical failure");
  }
  return TSAC_ERR_NUMERICAL;
}

template <typename Fn>
tsac_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const SamplingExhaustedError& e) {
    return fail(TSAC_ERR_SAMPLING_EXHAUSTED, e.what());
  } catch (const InsufficientDataError& e) {
    return fail(TSAC_ERR_INSUFFICIENT_DATA, e.what());
  } catch (const ConfigError& e) {
    return fail(TSAC_ERR_CONFIG, e.what());
  } catch (const IoError& e) {
    return fail(TSAC_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(TSAC_ERR_INVALID_ARG, e.what());
  } catch (const std::exception& e) {
    return fail(TSAC_ERR_NUMERICAL, e.what());
  } catch (...) {
    return fail(TSAC_ERR_NUMERICAL, "unknown error");
  }
}

Matrix from_row_major(const double* data, int rows, int cols) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
  return m;
}

void to_row_major(const Matrix& m, double* out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out[r * m.cols() + c] = m(r, c);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Json parse_json_arg(const char* text, const char* what) {
  if (!text) throw ConfigError(std::string(what) + ": null config");
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

int reason_code(MembershipReason r) {
  switch (r) {
    case MembershipReason::Member: return TSAC_MEMBER;
    case MembershipReason::FrobeniusBound: return TSAC_REASON_FROBENIUS_BOUND;
    case MembershipReason::NotStabilizable:
      return TSAC_REASON_NOT_STABILIZABLE;
    case MembershipReason::GainBound: return TSAC_REASON_GAIN_BOUND;
    case MembershipReason::SpectralRadius:
      return TSAC_REASON_SPECTRAL_RADIUS;
    case MembershipReason::NumericalFailure:
      return TSAC_REASON_NUMERICAL_FAILURE;
  }
  return TSAC_REASON_NUMERICAL_FAILURE;
}

}  // namespace

struct tsac_model {
  SystemParams sys;
  CostMatrices cost;
  double sigma_w = 1.0;
};

struct tsac_rls {
  RlsState state;
};

struct tsac_controller {
  std::unique_ptr<Controller> impl;
};

extern "C" {

const char* tsac_version(void) { return "0.1.0"; }

const char* tsac_last_error(void) { return g_last_error.c_str(); }

void tsac_string_free(char* s) { std::free(s); }

tsac_status tsac_model_create(const double* a, const double* b,
                              const double* q, const double* r, int n, int d,
                              double sigma_w, tsac_model** out) {
  return guarded([&]() -> tsac_status {
    if (!a || !b || !out)
      throw std::invalid_argument("tsac_model_create: null argument");
    auto m = std::make_unique<tsac_model>();
    m->sys.a = from_row_major(a, n, n);
    m->sys.b = from_row_major(b, n, d);
    m->cost.q = q ? from_row_major(q, n, n) : Matrix::Identity(n, n);
    m->cost.r = r ? from_row_major(r, d, d) : Matrix::Identity(d, d);
    m->sigma_w = sigma_w;
    m->sys.validate();
    m->cost.validate(n, d);
    if (sigma_w <= 0.0)
      throw std::invalid_argument("tsac_model_create: sigma_w must be > 0");
    *out = m.release();
    return TSAC_OK;
  });
}

tsac_status tsac_model_builtin(const char* name, tsac_model** out) {
  return guarded([&]() -> tsac_status {
    if (!name || !out)
      throw std::invalid_argument("tsac_model_builtin: null argument");
    Json plant_cfg;
    plant_cfg["builtin"] = name;
    PlantConfig plant = parse_plant_json(plant_cfg);
    auto m = std::make_unique<tsac_model>();
    m->sys = plant.sys;
    m->cost = plant.cost;
    m->sigma_w = plant.sigma_w;
    *out = m.release();
    return TSAC_OK;
  });
}

void tsac_model_free(tsac_model* m) { delete m; }

int tsac_model_state_dim(const tsac_model* m) { return m ? m->sys.n() : 0; }
int tsac_model_input_dim(const tsac_model* m) { return m ? m->sys.d() : 0; }

tsac_status tsac_dare_solve(const tsac_model* m, double tol, int max_iter,
                            double* p_out, double* k_out, double* j_out,
                            double* residual_out, int* iterations_out) {
  return guarded([&]() -> tsac_status {
    if (!m) throw std::invalid_argument("tsac_dare_solve: null model");
    DareOptions opt;
    if (tol > 0) opt.tol = tol;
    if (max_iter > 0) opt.max_iter = max_iter;
    opt.sigma_w = m->sigma_w;
    DareResult res = solve_dare(m->sys, m->cost, opt);
    if (iterations_out) *iterations_out = res.sol.iterations;
    if (!res.ok()) return from_solve_status(res.status, "tsac_dare_solve");
    if (p_out) to_row_major(res.sol.p, p_out);
    if (k_out) to_row_major(res.sol.k, k_out);
    if (j_out) *j_out = res.sol.j;
    if (residual_out) *residual_out = res.sol.residual;
    return TSAC_OK;
  });
}

tsac_status tsac_spectral_radius(const double* m, int n, double* out) {
  return guarded([&]() -> tsac_status {
    if (!m || !out)
      throw std::invalid_argument("tsac_spectral_radius: null argument");
    *out = spectral_radius(from_row_major(m, n, n));
    return TSAC_OK;
  });
}

tsac_status tsac_check_membership(const tsac_model* m, double kappa,
                                  double gamma, double s_bound,
                                  tsac_membership_report* out) {
  return guarded([&]() -> tsac_status {
    if (!m || !out)
      throw std::invalid_argument("tsac_check_membership: null argument");
    StabilizabilityParams params{kappa, gamma, s_bound};
    MembershipReport rep = membership_in_S(m->sys, m->cost, params);
    out->member = rep.member ? 1 : 0;
    out->reason = reason_code(rep.reason);
    out->theta_fro = rep.theta_fro;
    out->gain_norm = rep.gain_norm;
    out->rho_cl = rep.rho_cl;
    return TSAC_OK;
  });
}

tsac_status tsac_grad_l_at_optimum(const tsac_model* m, double* grad_out) {
  return guarded([&]() -> tsac_status {
    if (!m || !grad_out)
      throw std::invalid_argument("tsac_grad_l_at_optimum: null argument");
    GradLResult res = grad_L_at_optimum(m->sys, m->cost, m->sigma_w);
    if (res.status != SolveStatus::Ok)
      return from_solve_status(res.status, "tsac_grad_l_at_optimum");
    to_row_major(res.grad, grad_out);
    return TSAC_OK;
  });
}

tsac_status tsac_rls_create(int n, int d, double mu, double sigma_w,
                            double s_bound, double delta, tsac_rls** out) {
  return guarded([&]() -> tsac_status {
    if (!out) throw std::invalid_argument("tsac_rls_create: null out");
    RlsConfig cfg;
    cfg.n = n;
    cfg.d = d;
    cfg.mu = mu;
    cfg.sigma_w = sigma_w;
    cfg.s_bound = s_bound;
    cfg.delta = delta;
    *out = new tsac_rls{RlsState(cfg)};
    return TSAC_OK;
  });
}

void tsac_rls_free(tsac_rls* rls) { delete rls; }

tsac_status tsac_rls_update(tsac_rls* rls, const double* z,
                            const double* x_next) {
  return guarded([&]() -> tsac_status {
    if (!rls || !z || !x_next)
      throw std::invalid_argument("tsac_rls_update: null argument");
    const int p = rls->state.dim();
    const int n = rls->state.config().n;
    rls->state.update(Eigen::Map<const Vector>(z, p),
                      Eigen::Map<const Vector>(x_next, n));
    return TSAC_OK;
  });
}

tsac_status tsac_rls_radii(const tsac_rls* rls, double* beta_out,
                           double* upsilon_out) {
  return guarded([&]() -> tsac_status {
    if (!rls) throw std::invalid_argument("tsac_rls_radii: null rls");
    ConfidenceRadii radii = rls->state.confidence_radii();
    if (beta_out) *beta_out = radii.beta;
    if (upsilon_out) *upsilon_out = radii.upsilon;
    return TSAC_OK;
  });
}

tsac_status tsac_rls_theta(const tsac_rls* rls, double* theta_out) {
  return guarded([&]() -> tsac_status {
    if (!rls || !theta_out)
      throw std::invalid_argument("tsac_rls_theta: null argument");
    to_row_major(rls->state.theta_hat(), theta_out);
    return TSAC_OK;
  });
}

tsac_status tsac_rls_min_eigenvalue(const tsac_rls* rls, double* out) {
  return guarded([&]() -> tsac_status {
    if (!rls || !out)
      throw std::invalid_argument("tsac_rls_min_eigenvalue: null argument");
    *out = rls->state.min_eigenvalue_v();
    return TSAC_OK;
  });
}

long tsac_rls_sample_count(const tsac_rls* rls) {
  return rls ? rls->state.t() : 0;
}

tsac_status tsac_controller_create(const tsac_model* m, const char* kind,
                                   const char* config_json, uint64_t seed,
                                   tsac_controller** out) {
  return guarded([&]() -> tsac_status {
    if (!m || !kind || !out)
      throw std::invalid_argument("tsac_controller_create: null argument");
    auto k = controller_kind_from_string(kind);
    if (!k)
      throw ConfigError(std::string("unknown controller kind '") + kind + "'");
    Json j = config_json ? parse_json_arg(config_json, "controller config")
                         : Json::object();
    TsacConfig tc;
    tc.cost = m->cost;
    tc.sigma_w = m->sigma_w;
    if (!j.contains("stabilizability"))
      throw ConfigError("controller config: missing 'stabilizability'");
    tc.stab.kappa = j.at("stabilizability").at("kappa").get<double>();
    tc.stab.gamma = j.at("stabilizability").at("gamma").get<double>();
    tc.stab.s_bound = j.at("stabilizability").at("s_bound").get<double>();
    if (j.contains("delta")) tc.delta = j.at("delta").get<double>();
    if (j.contains("horizon")) tc.horizon = j.at("horizon").get<long>();
    if (j.contains("t_w")) tc.t_w = j.at("t_w").get<long>();
    if (j.contains("tau0")) tc.tau0 = j.at("tau0").get<long>();
    if (j.contains("mu")) tc.mu = j.at("mu").get<double>();
    if (j.contains("sigma_nu")) tc.sigma_nu = j.at("sigma_nu").get<double>();
    if (j.contains("sampling")) {
      const Json& s = j.at("sampling");
      if (s.contains("max_attempts"))
        tc.sampling.max_attempts = s.at("max_attempts").get<int>();
      if (s.contains("scale_levels"))
        tc.sampling.scale_levels = s.at("scale_levels").get<int>();
    }
    if (j.contains("pgd")) {
      const Json& p = j.at("pgd");
      if (p.contains("step_scale"))
        tc.pgd.step_scale = p.at("step_scale").get<double>();
      if (p.contains("iters")) tc.pgd.iters = p.at("iters").get<int>();
      if (p.contains("fd_step")) tc.pgd.fd_step = p.at("fd_step").get<double>();
    }
    auto controller =
        make_controller(*k, tc, m->sys.n(), m->sys.d(),
                        substream_seed(seed, Substream::Sampling),
                        substream_seed(seed, Substream::Exploration));
    *out = new tsac_controller{std::move(controller)};
    return TSAC_OK;
  });
}

void tsac_controller_free(tsac_controller* c) { delete c; }

tsac_status tsac_controller_act(tsac_controller* c, const double* x,
                                double* u_out) {
  return guarded([&]() -> tsac_status {
    if (!c || !x || !u_out)
      throw std::invalid_argument("tsac_controller_act: null argument");
    const int n = c->impl->rls().config().n;
    const int d = c->impl->rls().config().d;
    Vector u = c->impl->act(Eigen::Map<const Vector>(x, n));
    for (int i = 0; i < d; ++i) u_out[i] = u[i];
    return TSAC_OK;
  });
}

tsac_status tsac_controller_observe(tsac_controller* c, const double* x,
                                    const double* u, const double* x_next) {
  return guarded([&]() -> tsac_status {
    if (!c || !x || !u || !x_next)
      throw std::invalid_argument("tsac_controller_observe: null argument");
    const int n = c->impl->rls().config().n;
    const int d = c->impl->rls().config().d;
    c->impl->observe(Eigen::Map<const Vector>(x, n),
                     Eigen::Map<const Vector>(u, d),
                     Eigen::Map<const Vector>(x_next, n));
    return TSAC_OK;
  });
}

tsac_status tsac_controller_gain(const tsac_controller* c, double* gain_out) {
  return guarded([&]() -> tsac_status {
    if (!c || !gain_out)
      throw std::invalid_argument("tsac_controller_gain: null argument");
    to_row_major(c->impl->gain(), gain_out);
    return TSAC_OK;
  });
}

long tsac_controller_step(const tsac_controller* c) {
  return c ? c->impl->step() : 0;
}

tsac_status tsac_bench_run(const char* config_json, char** summary_json_out) {
  return guarded([&]() -> tsac_status {
    Json j = parse_json_arg(config_json, "bench config");
    BenchConfig cfg = parse_bench_config(j);
    BenchResult result = bench(cfg);
    if (summary_json_out)
      *summary_json_out = dup_string(summary_to_json(cfg, result).dump(2));
    return TSAC_OK;
  });
}

tsac_status tsac_episode_run(const char* config_json,
                             const char* controller_kind, uint64_t seed,
                             const char* csv_path, char** run_json_out) {
  return guarded([&]() -> tsac_status {
    Json j = parse_json_arg(config_json, "run config");
    if (controller_kind) j["controllers"] = Json::array({controller_kind});
    if (seed != 0) j["base_seed"] = seed;
    BenchConfig cfg = parse_bench_config(j);
    RunLog log = run_single(cfg, 0, 0);
    if (csv_path) write_file_atomic(csv_path, run_csv(log));
    if (run_json_out)
      *run_json_out = dup_string(run_to_json(cfg, log, 0).dump(2));
    return TSAC_OK;
  });
}

tsac_status tsac_dare_report(const char* config_json, char** report_json_out) {
  return guarded([&]() -> tsac_status {
    Json report = dare_report(parse_json_arg(config_json, "dare config"));
    if (report_json_out) *report_json_out = dup_string(report.dump(2));
    return TSAC_OK;
  });
}

tsac_status tsac_check_system(const char* config_json,
                              char** report_json_out) {
  return guarded([&]() -> tsac_status {
    Json report =
        check_system_report(parse_json_arg(config_json, "check config"));
    if (report_json_out) *report_json_out = dup_string(report.dump(2));
    return TSAC_OK;
  });
}

tsac_status tsac_optimism_mc(const char* config_json,
                             char** report_json_out) {
  return guarded([&]() -> tsac_status {
    Json report =
        optimism_mc_report(parse_json_arg(config_json, "optimism config"));
    if (report_json_out) *report_json_out = dup_string(report.dump(2));
    return TSAC_OK;
  });
}

tsac_status tsac_slope_fit_files(const char* const* csv_paths, size_t count,
                                 long t_min, char** report_json_out) {
  return guarded([&]() -> tsac_status {
    if (!csv_paths) throw std::invalid_argument("tsac_slope_fit_files: null");
    std::vector<std::string> paths(csv_paths, csv_paths + count);
    Json report = slope_report_from_files(paths, t_min);
    if (report_json_out) *report_json_out = dup_string(report.dump(2));
    return TSAC_OK;
  });
}

}  // extern "C"
