/* C interface to the TSAC adaptive-control library.
 *
 * All matrices cross this boundary as row-major double arrays. Handles are
 * opaque; every fallible call returns a tsac_status, with a thread-local
 * message available from tsac_last_error(). Strings returned through char**
 * out-parameters are owned by the caller and released with
 * tsac_string_free().
 */
#ifndef TSAC_TSAC_H
#define TSAC_TSAC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TSAC_API __declspec(dllexport)
#else
#define TSAC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tsac_status {
  TSAC_OK = 0,
  TSAC_ERR_INVALID_ARG = 1,
  TSAC_ERR_CONFIG = 2,
  TSAC_ERR_IO = 3,
  TSAC_ERR_NUMERICAL = 4,
  TSAC_ERR_NOT_STABILIZABLE = 5,
  TSAC_ERR_SAMPLING_EXHAUSTED = 6,
  TSAC_ERR_INSUFFICIENT_DATA = 7,
} tsac_status;

TSAC_API const char* tsac_version(void);

/* Message for the most recent failure on this thread. */
TSAC_API const char* tsac_last_error(void);

TSAC_API void tsac_string_free(char* s);

/* ---------------------------------------------------------------- models */

/* A plant (A, B) with cost matrices (Q, R) and noise level sigma_w. */
typedef struct tsac_model tsac_model;

TSAC_API tsac_status tsac_model_create(const double* a, const double* b,
                                       const double* q, const double* r,
                                       int n, int d, double sigma_w,
                                       tsac_model** out);

/* Builtins: "boeing747" (4 states, 2 inputs, Q=R=I, sigma_w=1),
 * "scalar" (a=0.9, b=1, q=r=1, sigma_w=1). */
TSAC_API tsac_status tsac_model_builtin(const char* name, tsac_model** out);

TSAC_API void tsac_model_free(tsac_model* m);

TSAC_API int tsac_model_state_dim(const tsac_model* m);
TSAC_API int tsac_model_input_dim(const tsac_model* m);

/* -------------------------------------------------------------- numerics */

/* Riccati solve. p_out (n*n), k_out (d*n) may be NULL when not wanted.
 * Pass tol <= 0 or max_iter <= 0 for the defaults (1e-10, 100000). */
TSAC_API tsac_status tsac_dare_solve(const tsac_model* m, double tol,
                                     int max_iter, double* p_out,
                                     double* k_out, double* j_out,
                                     double* residual_out,
                                     int* iterations_out);

TSAC_API tsac_status tsac_spectral_radius(const double* m, int n, double* out);

typedef enum tsac_membership_reason {
  TSAC_MEMBER = 0,
  TSAC_REASON_FROBENIUS_BOUND = 1,
  TSAC_REASON_NOT_STABILIZABLE = 2,
  TSAC_REASON_GAIN_BOUND = 3,
  TSAC_REASON_SPECTRAL_RADIUS = 4,
  TSAC_REASON_NUMERICAL_FAILURE = 5,
} tsac_membership_reason;

typedef struct tsac_membership_report {
  int member; /* boolean */
  int reason; /* tsac_membership_reason; first failed check */
  double theta_fro;
  double gain_norm;
  double rho_cl;
} tsac_membership_report;

TSAC_API tsac_status tsac_check_membership(const tsac_model* m, double kappa,
                                           double gamma, double s_bound,
                                           tsac_membership_report* out);

/* Jacobian 2 P A_c Sigma of the closed-loop cost at the optimum of the
 * model's plant; grad_out is n*n row-major. */
TSAC_API tsac_status tsac_grad_l_at_optimum(const tsac_model* m,
                                            double* grad_out);

/* ------------------------------------------------------------ estimation */

typedef struct tsac_rls tsac_rls;

TSAC_API tsac_status tsac_rls_create(int n, int d, double mu, double sigma_w,
                                     double s_bound, double delta,
                                     tsac_rls** out);
TSAC_API void tsac_rls_free(tsac_rls* rls);

/* z is the (n+d) covariate actually played, x_next the observed state. */
TSAC_API tsac_status tsac_rls_update(tsac_rls* rls, const double* z,
                                     const double* x_next);
TSAC_API tsac_status tsac_rls_radii(const tsac_rls* rls, double* beta_out,
                                    double* upsilon_out);
/* theta_out is (n+d)*n row-major. */
TSAC_API tsac_status tsac_rls_theta(const tsac_rls* rls, double* theta_out);
TSAC_API tsac_status tsac_rls_min_eigenvalue(const tsac_rls* rls, double* out);
TSAC_API long tsac_rls_sample_count(const tsac_rls* rls);

/* ----------------------------------------------------------- controllers */

typedef struct tsac_controller tsac_controller;

/* kind: "tsac", "ts_lqr", "ofulq", "stabl", or "cec".
 * config_json carries the controller parameters (same keys as the bench
 * config: stabilizability, delta, horizon, t_w, tau0, mu, sigma_nu,
 * sampling, pgd); plant cost and sigma_w come from the model. seed is the
 * run seed; sampling and exploration substreams derive from it. */
TSAC_API tsac_status tsac_controller_create(const tsac_model* m,
                                            const char* kind,
                                            const char* config_json,
                                            uint64_t seed,
                                            tsac_controller** out);
TSAC_API void tsac_controller_free(tsac_controller* c);

TSAC_API tsac_status tsac_controller_act(tsac_controller* c, const double* x,
                                         double* u_out);
TSAC_API tsac_status tsac_controller_observe(tsac_controller* c,
                                             const double* x, const double* u,
                                             const double* x_next);
/* gain_out is d*n row-major. */
TSAC_API tsac_status tsac_controller_gain(const tsac_controller* c,
                                          double* gain_out);
TSAC_API long tsac_controller_step(const tsac_controller* c);

/* ---------------------------------------------------- orchestration (JSON)
 *
 * These entry points take the structured config described in the README and
 * return a JSON report; they are what the CLI subcommands call.
 */

/* Full multi-run benchmark. Writes artifacts when the config names an
 * out_dir; returns the summary JSON. */
TSAC_API tsac_status tsac_bench_run(const char* config_json,
                                    char** summary_json_out);

/* Single episode. controller_kind may be NULL (first configured controller);
 * seed overrides base_seed when nonzero; csv_path, when non-NULL, receives
 * the full per-step CSV. Returns the run JSON. */
TSAC_API tsac_status tsac_episode_run(const char* config_json,
                                      const char* controller_kind,
                                      uint64_t seed, const char* csv_path,
                                      char** run_json_out);

/* P, K, J, residual and closed-loop spectral radius for the configured
 * plant. */
TSAC_API tsac_status tsac_dare_report(const char* config_json,
                                      char** report_json_out);

/* Membership report with reason codes plus tau0, T0, X_s diagnostics. */
TSAC_API tsac_status tsac_check_system(const char* config_json,
                                       char** report_json_out);

/* Standalone Monte-Carlo estimate of the optimistic-sampling probability
 * for a configured system and ellipsoid geometry. */
TSAC_API tsac_status tsac_optimism_mc(const char* config_json,
                                      char** report_json_out);

/* Log-log regret-slope fit over per-step CSVs emitted by run/bench.
 * t_min <= 0 selects the default T/10. */
TSAC_API tsac_status tsac_slope_fit_files(const char* const* csv_paths,
                                          size_t count, long t_min,
                                          char** report_json_out);

#ifdef __cplusplus
}
#endif

#endif /* TSAC_TSAC_H */
