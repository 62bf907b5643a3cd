#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tsac/sim.hpp"

namespace tsac {

using Json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ControllerSpec {
  ControllerKind kind = ControllerKind::Tsac;
  std::string label;  // defaults to the kind name; keys output files
  // Per-controller overrides of the shared TsacConfig.
  std::optional<long> t_w;
  std::optional<long> tau0;
  std::optional<double> mu;
  std::optional<double> sigma_nu;
  std::optional<PgdConfig> pgd;
};

struct BenchConfig {
  PlantConfig plant;  // seed field unused; per-run seeds derive from base_seed
  TsacConfig controller_defaults;
  std::vector<ControllerSpec> controllers;
  long runs = 1;
  long horizon = 200;
  std::uint64_t base_seed = 1;
  bool paired_seeds = true;
  DiagnosticsFlags diagnostics;
  std::string out_dir;       // empty: no artifacts written
  int threads = 0;           // 0: hardware concurrency
  bool write_step_csv = true;

  void validate() const;
};

/// Parses the JSON data model (also the on-disk config format).
BenchConfig parse_bench_config(const Json& j);
BenchConfig load_bench_config(const std::string& path);
PlantConfig parse_plant_json(const Json& j);

struct ControllerSummary {
  double avg_regret = 0.0;
  double top95_regret = 0.0;
  double top90_regret = 0.0;
  double avg_max_norm = 0.0;
  double top95_max_norm = 0.0;
  double top90_max_norm = 0.0;
  long diverged = 0;
  std::optional<double> p_opt;    // pooled over post-t_w policy updates
  std::optional<double> mean_rts; // mean R^TS trace endpoint
};

struct BenchResult {
  // Keyed by controller label, insertion order preserved.
  std::vector<std::pair<std::string, ControllerSummary>> summaries;
  // Per controller label: per-run logs ordered by run index.
  std::map<std::string, std::vector<RunLog>> runs;
};

/// Executes runs x controllers episodes (parallel across episodes, results
/// ordered by run index) and writes artifacts when out_dir is set:
/// <label>_run<idx>.csv, <label>_run<idx>.json, summary.json.
BenchResult bench(const BenchConfig& cfg);

/// One episode of the bench protocol (controller ctrl_idx, run run_idx),
/// with the same seed derivation as bench().
RunLog run_single(const BenchConfig& cfg, std::size_t ctrl_idx, long run_idx);

Json summary_to_json(const BenchConfig& cfg, const BenchResult& result);
Json run_to_json(const BenchConfig& cfg, const RunLog& log, long run_index);

/// Mean over the best ceil(p * n / 100) values (ascending). p in (0, 100].
double truncated_mean(std::vector<double> values, double top_percent);

struct SlopeFit {
  double slope = 0.0;
  double ci_lo = 0.0;   // bootstrap 90% interval over runs
  double ci_hi = 0.0;
  double intercept = 0.0;
  long points = 0;
};

/// OLS slope of log(mean regret) vs log(t) over t in [t_min, T]. Curves are
/// per-run cumulative regret indexed from t = 1; when the pooled minimum is
/// <= 0 every curve is shifted by |min|+1 first. Throws ConfigError if fewer
/// than 10 points remain.
SlopeFit fit_regret_slope(const std::vector<std::vector<double>>& curves,
                          long t_min, int bootstrap_rounds = 200,
                          std::uint64_t seed = 1);

/// Atomic text write: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string run_csv(const RunLog& log);
constexpr const char* kCsvHeader =
    "t,cost,cum_regret,state_norm,policy_id,est_error,lambda_min_v,optimistic";

/// cum_regret column of an emitted per-step CSV.
std::vector<double> read_regret_curve_csv(const std::string& path);

// Reports backing the CLI subcommands; inputs use the config data model.
Json dare_report(const Json& config);
Json check_system_report(const Json& config);
Json optimism_mc_report(const Json& config);
Json slope_report_from_files(const std::vector<std::string>& csv_paths,
                             long t_min);

}  // namespace tsac
