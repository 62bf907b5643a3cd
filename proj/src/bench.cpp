#include "tsac/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace tsac {

namespace fs = std::filesystem;

void BenchConfig::validate() const {
  plant.validate();
  if (runs < 1) throw ConfigError("bench: runs must be >= 1");
  if (horizon < 1) throw ConfigError("bench: horizon must be >= 1");
  if (controllers.empty())
    throw ConfigError("bench: controller list must be non-empty");
}

namespace {

Matrix parse_matrix(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError("config field '" + field +
                      "': expected row-major nested arrays");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ConfigError("config field '" + field + "': ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw ConfigError("config field '" + field + "': non-numeric entry");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

double require_number(const Json& j, const std::string& field) {
  if (!j.is_number())
    throw ConfigError("config field '" + field + "': expected a number");
  return j.get<double>();
}

}  // namespace

PlantConfig parse_plant_json(const Json& j) {
  PlantConfig plant;
  bool have_system = false;
  if (j.contains("builtin")) {
    const std::string name = j.at("builtin").get<std::string>();
    if (name == "boeing747") {
      plant = boeing_plant();
    } else if (name == "scalar") {
      plant.sys.a = Matrix::Constant(1, 1, 0.9);
      plant.sys.b = Matrix::Constant(1, 1, 1.0);
      plant.cost.q = Matrix::Identity(1, 1);
      plant.cost.r = Matrix::Identity(1, 1);
      plant.sigma_w = 1.0;
    } else {
      throw ConfigError("config field 'plant.builtin': unknown plant '" +
                        name + "'");
    }
    have_system = true;
  }
  if (j.contains("a") || j.contains("b")) {
    if (!j.contains("a") || !j.contains("b"))
      throw ConfigError("config: inline plant needs both 'a' and 'b'");
    plant.sys.a = parse_matrix(j.at("a"), "plant.a");
    plant.sys.b = parse_matrix(j.at("b"), "plant.b");
    plant.cost.q = Matrix::Identity(plant.sys.n(), plant.sys.n());
    plant.cost.r = Matrix::Identity(plant.sys.d(), plant.sys.d());
    have_system = true;
  }
  if (!have_system)
    throw ConfigError("config field 'plant': need 'builtin' or 'a'/'b'");
  if (j.contains("q")) plant.cost.q = parse_matrix(j.at("q"), "plant.q");
  if (j.contains("r")) plant.cost.r = parse_matrix(j.at("r"), "plant.r");
  if (j.contains("sigma_w"))
    plant.sigma_w = require_number(j.at("sigma_w"), "plant.sigma_w");
  if (j.contains("x0")) {
    const Json& x0 = j.at("x0");
    if (!x0.is_array())
      throw ConfigError("config field 'plant.x0': expected array");
    plant.x0.resize(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i)
      plant.x0[i] = require_number(x0[i], "plant.x0");
  }
  if (j.contains("divergence_guard"))
    plant.divergence_guard =
        require_number(j.at("divergence_guard"), "plant.divergence_guard");
  return plant;
}

namespace {

PgdConfig parse_pgd(const Json& j) {
  PgdConfig pgd;
  if (j.contains("step_scale"))
    pgd.step_scale = require_number(j.at("step_scale"), "pgd.step_scale");
  if (j.contains("iters")) pgd.iters = j.at("iters").get<int>();
  if (j.contains("fd_step"))
    pgd.fd_step = require_number(j.at("fd_step"), "pgd.fd_step");
  return pgd;
}

ControllerSpec parse_controller_spec(const Json& j) {
  ControllerSpec spec;
  std::string kind_name;
  if (j.is_string()) {
    kind_name = j.get<std::string>();
  } else if (j.is_object()) {
    if (!j.contains("kind"))
      throw ConfigError("config field 'controllers[]': missing 'kind'");
    kind_name = j.at("kind").get<std::string>();
  } else {
    throw ConfigError("config field 'controllers[]': expected string or object");
  }
  auto kind = controller_kind_from_string(kind_name);
  if (!kind)
    throw ConfigError("config field 'controllers[]': unknown kind '" +
                      kind_name + "'");
  spec.kind = *kind;
  spec.label = to_string(*kind);
  if (j.is_object()) {
    if (j.contains("label")) spec.label = j.at("label").get<std::string>();
    if (j.contains("t_w")) spec.t_w = j.at("t_w").get<long>();
    if (j.contains("tau0")) spec.tau0 = j.at("tau0").get<long>();
    if (j.contains("mu")) spec.mu = require_number(j.at("mu"), "controllers[].mu");
    if (j.contains("sigma_nu"))
      spec.sigma_nu = require_number(j.at("sigma_nu"), "controllers[].sigma_nu");
    if (j.contains("pgd")) spec.pgd = parse_pgd(j.at("pgd"));
  }
  return spec;
}

}  // namespace

BenchConfig parse_bench_config(const Json& j) {
  try {
    BenchConfig cfg;
    if (!j.contains("plant"))
      throw ConfigError("config: missing 'plant' section");
    cfg.plant = parse_plant_json(j.at("plant"));

    TsacConfig& tc = cfg.controller_defaults;
    tc.cost = cfg.plant.cost;
    tc.sigma_w = cfg.plant.sigma_w;
    if (j.contains("stabilizability")) {
      const Json& s = j.at("stabilizability");
      tc.stab.kappa = require_number(s.at("kappa"), "stabilizability.kappa");
      tc.stab.gamma = require_number(s.at("gamma"), "stabilizability.gamma");
      tc.stab.s_bound =
          require_number(s.at("s_bound"), "stabilizability.s_bound");
    } else {
      throw ConfigError("config: missing 'stabilizability' section");
    }
    if (j.contains("delta")) tc.delta = require_number(j.at("delta"), "delta");
    if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<long>();
    tc.horizon = cfg.horizon;
    if (j.contains("t_w")) tc.t_w = j.at("t_w").get<long>();
    if (j.contains("tau0")) tc.tau0 = j.at("tau0").get<long>();
    if (j.contains("mu")) tc.mu = require_number(j.at("mu"), "mu");
    if (j.contains("sigma_nu"))
      tc.sigma_nu = require_number(j.at("sigma_nu"), "sigma_nu");
    if (j.contains("t_w_schedule_c"))
      tc.t_w_schedule_c =
          require_number(j.at("t_w_schedule_c"), "t_w_schedule_c");
    if (j.contains("sampling")) {
      const Json& s = j.at("sampling");
      if (s.contains("max_attempts"))
        tc.sampling.max_attempts = s.at("max_attempts").get<int>();
      if (s.contains("scale_levels"))
        tc.sampling.scale_levels = s.at("scale_levels").get<int>();
    }
    if (j.contains("pgd")) tc.pgd = parse_pgd(j.at("pgd"));

    if (!j.contains("controllers") || !j.at("controllers").is_array())
      throw ConfigError("config: missing 'controllers' array");
    for (const Json& c : j.at("controllers"))
      cfg.controllers.push_back(parse_controller_spec(c));

    if (j.contains("runs")) cfg.runs = j.at("runs").get<long>();
    if (j.contains("base_seed"))
      cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("paired_seeds"))
      cfg.paired_seeds = j.at("paired_seeds").get<bool>();
    if (j.contains("diagnostics")) {
      const Json& d = j.at("diagnostics");
      if (d.contains("optimism"))
        cfg.diagnostics.optimism = d.at("optimism").get<bool>();
      if (d.contains("rts_trace"))
        cfg.diagnostics.rts_trace = d.at("rts_trace").get<bool>();
    }
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("write_step_csv"))
      cfg.write_step_csv = j.at("write_step_csv").get<bool>();

    cfg.validate();
    return cfg;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_bench_config(j);
}

namespace {

TsacConfig config_for_spec(const BenchConfig& cfg, const ControllerSpec& spec) {
  TsacConfig c = cfg.controller_defaults;
  if (spec.t_w) c.t_w = spec.t_w;
  if (spec.tau0) c.tau0 = spec.tau0;
  if (spec.mu) c.mu = spec.mu;
  if (spec.sigma_nu) c.sigma_nu = spec.sigma_nu;
  if (spec.pgd) c.pgd = *spec.pgd;
  return c;
}

std::uint64_t run_seed_for(const BenchConfig& cfg, std::size_t ctrl_idx,
                           long run_idx) {
  if (cfg.paired_seeds) return derive_seed(cfg.base_seed, run_idx);
  return derive_seed(derive_seed(cfg.base_seed, 1000003 + ctrl_idx), run_idx);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RunLog run_single(const BenchConfig& cfg, std::size_t ctrl_idx, long run_idx) {
  if (ctrl_idx >= cfg.controllers.size())
    throw std::invalid_argument("run_single: controller index out of range");
  const ControllerSpec& spec = cfg.controllers[ctrl_idx];
  PlantConfig plant = cfg.plant;
  plant.seed = run_seed_for(cfg, ctrl_idx, run_idx);
  TsacConfig tc = config_for_spec(cfg, spec);
  auto controller = make_controller(
      spec.kind, tc, plant.sys.n(), plant.sys.d(),
      substream_seed(plant.seed, Substream::Sampling),
      substream_seed(plant.seed, Substream::Exploration));
  RunLog log = run_episode(plant, *controller, cfg.horizon, cfg.diagnostics);
  log.controller = spec.label;
  return log;
}

BenchResult bench(const BenchConfig& cfg) {
  cfg.validate();

  struct Task {
    std::size_t ctrl_idx;
    long run_idx;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cfg.controllers.size(); ++c)
    for (long r = 0; r < cfg.runs; ++r) tasks.push_back({c, r});

  BenchResult result;
  for (const auto& spec : cfg.controllers)
    result.runs[spec.label].resize(cfg.runs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      {
        std::scoped_lock lock(error_mutex);
        if (first_error) return;
      }
      const Task& task = tasks[i];
      const ControllerSpec& spec = cfg.controllers[task.ctrl_idx];
      try {
        result.runs[spec.label][task.run_idx] =
            run_single(cfg, task.ctrl_idx, task.run_idx);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  int threads = cfg.threads > 0
                    ? cfg.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, tasks.size()));
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  // Aggregate, ordered by config's controller list.
  for (const auto& spec : cfg.controllers) {
    const auto& logs = result.runs[spec.label];
    ControllerSummary s;
    std::vector<double> regrets, norms;
    regrets.reserve(logs.size());
    norms.reserve(logs.size());
    long pooled_updates = 0, pooled_optimistic = 0;
    double rts_sum = 0.0;
    long rts_count = 0;
    for (const RunLog& log : logs) {
      regrets.push_back(log.regret);
      norms.push_back(log.max_state_norm);
      if (log.diverged) ++s.diverged;
      if (log.p_opt_post_tw) {
        pooled_updates += log.post_tw_updates;
        pooled_optimistic += static_cast<long>(
            std::lround(*log.p_opt_post_tw * log.post_tw_updates));
      }
      if (cfg.diagnostics.rts_trace) {
        rts_sum += log.rts_endpoint;
        ++rts_count;
      }
    }
    s.avg_regret = truncated_mean(regrets, 100.0);
    s.top95_regret = truncated_mean(regrets, 95.0);
    s.top90_regret = truncated_mean(regrets, 90.0);
    s.avg_max_norm = truncated_mean(norms, 100.0);
    s.top95_max_norm = truncated_mean(norms, 95.0);
    s.top90_max_norm = truncated_mean(norms, 90.0);
    if (pooled_updates > 0)
      s.p_opt = static_cast<double>(pooled_optimistic) / pooled_updates;
    if (rts_count > 0) s.mean_rts = rts_sum / rts_count;
    result.summaries.emplace_back(spec.label, s);
  }

  if (!cfg.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create out dir: " + cfg.out_dir);
    for (const auto& spec : cfg.controllers) {
      const auto& logs = result.runs.at(spec.label);
      for (long r = 0; r < cfg.runs; ++r) {
        const std::string stem =
            cfg.out_dir + "/" + spec.label + "_run" + std::to_string(r);
        write_file_atomic(stem + ".json",
                          run_to_json(cfg, logs[r], r).dump(2) + "\n");
        if (cfg.write_step_csv)
          write_file_atomic(stem + ".csv", run_csv(logs[r]));
      }
    }
    write_file_atomic(cfg.out_dir + "/summary.json",
                      summary_to_json(cfg, result).dump(2) + "\n");
  }
  return result;
}

Json summary_to_json(const BenchConfig& cfg, const BenchResult& result) {
  Json out;
  out["runs"] = cfg.runs;
  out["horizon"] = cfg.horizon;
  out["base_seed"] = cfg.base_seed;
  out["paired_seeds"] = cfg.paired_seeds;
  Json ctrls;
  for (const auto& [label, s] : result.summaries) {
    Json c;
    c["avg_regret"] = s.avg_regret;
    c["top95_regret"] = s.top95_regret;
    c["top90_regret"] = s.top90_regret;
    c["avg_max_norm"] = s.avg_max_norm;
    c["top95_max_norm"] = s.top95_max_norm;
    c["top90_max_norm"] = s.top90_max_norm;
    c["diverged"] = s.diverged;
    if (s.p_opt) c["p_opt"] = *s.p_opt;
    if (s.mean_rts) c["mean_rts"] = *s.mean_rts;
    ctrls[label] = c;
  }
  out["controllers"] = ctrls;
  return out;
}

Json run_to_json(const BenchConfig& cfg, const RunLog& log, long run_index) {
  Json out;
  out["controller"] = log.controller;
  out["run_index"] = run_index;
  out["seed"] = log.seed;
  out["horizon"] = log.horizon;
  out["steps"] = log.steps;
  out["regret"] = log.regret;
  out["max_state_norm"] = log.max_state_norm;
  out["diverged"] = log.diverged;
  out["j_star"] = log.j_star;
  out["rts_endpoint"] = log.rts_endpoint;
  out["t_w"] = log.t_w;
  out["tau0"] = log.tau0;
  if (log.p_opt_post_tw) {
    out["p_opt_post_tw"] = *log.p_opt_post_tw;
    out["post_tw_updates"] = log.post_tw_updates;
  }
  Json echo;
  echo["base_seed"] = cfg.base_seed;
  echo["paired_seeds"] = cfg.paired_seeds;
  echo["plant_n"] = cfg.plant.sys.n();
  echo["plant_d"] = cfg.plant.sys.d();
  echo["sigma_w"] = cfg.plant.sigma_w;
  echo["kappa"] = cfg.controller_defaults.stab.kappa;
  echo["gamma"] = cfg.controller_defaults.stab.gamma;
  echo["s_bound"] = cfg.controller_defaults.stab.s_bound;
  echo["delta"] = cfg.controller_defaults.delta;
  out["config"] = echo;
  return out;
}

double truncated_mean(std::vector<double> values, double top_percent) {
  if (values.empty())
    throw std::invalid_argument("truncated_mean: empty input");
  if (top_percent <= 0.0 || top_percent > 100.0)
    throw std::invalid_argument("truncated_mean: percent must be in (0,100]");
  std::sort(values.begin(), values.end());
  std::size_t k = static_cast<std::size_t>(
      std::ceil(top_percent * values.size() / 100.0));
  k = std::max<std::size_t>(1, std::min(k, values.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += values[i];
  return sum / k;
}

namespace {

double ols_log_slope(const std::vector<double>& mean_curve, long t_min,
                     double* intercept_out) {
  double min_v = *std::min_element(mean_curve.begin(), mean_curve.end());
  double shift = min_v <= 0.0 ? -min_v + 1.0 : 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long count = 0;
  for (std::size_t i = 0; i < mean_curve.size(); ++i) {
    long t = static_cast<long>(i) + 1;
    if (t < t_min) continue;
    double lx = std::log(static_cast<double>(t));
    double ly = std::log(mean_curve[i] + shift);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  double denom = count * sxx - sx * sx;
  double slope = (count * sxy - sx * sy) / denom;
  if (intercept_out) *intercept_out = (sy - slope * sx) / count;
  return slope;
}

}  // namespace

SlopeFit fit_regret_slope(const std::vector<std::vector<double>>& curves,
                          long t_min, int bootstrap_rounds,
                          std::uint64_t seed) {
  if (curves.empty()) throw InsufficientDataError("fit_regret_slope: no curves");
  std::size_t len = curves[0].size();
  for (const auto& c : curves) len = std::min(len, c.size());
  if (len == 0) throw InsufficientDataError("fit_regret_slope: empty curve");
  long points = static_cast<long>(len) - std::max(t_min - 1, 0L);
  if (points < 10)
    throw InsufficientDataError(
        "fit_regret_slope: fewer than 10 points after t_min");

  auto mean_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<double> mean(len, 0.0);
    for (std::size_t r : idx)
      for (std::size_t i = 0; i < len; ++i) mean[i] += curves[r][i];
    for (double& v : mean) v /= idx.size();
    return mean;
  };

  std::vector<std::size_t> all(curves.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  SlopeFit fit;
  fit.points = points;
  fit.slope = ols_log_slope(mean_of(all), t_min, &fit.intercept);

  if (bootstrap_rounds > 0 && curves.size() > 1) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::size_t> pick(0, curves.size() - 1);
    std::vector<double> slopes;
    slopes.reserve(bootstrap_rounds);
    std::vector<std::size_t> idx(curves.size());
    for (int b = 0; b < bootstrap_rounds; ++b) {
      for (auto& i : idx) i = pick(gen);
      slopes.push_back(ols_log_slope(mean_of(idx), t_min, nullptr));
    }
    std::sort(slopes.begin(), slopes.end());
    auto quantile = [&](double q) {
      double pos = q * (slopes.size() - 1);
      std::size_t lo = static_cast<std::size_t>(pos);
      std::size_t hi = std::min(lo + 1, slopes.size() - 1);
      double frac = pos - lo;
      return slopes[lo] * (1 - frac) + slopes[hi] * frac;
    };
    fit.ci_lo = quantile(0.05);
    fit.ci_hi = quantile(0.95);
  } else {
    fit.ci_lo = fit.ci_hi = fit.slope;
  }
  return fit;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + tmp.string());
    out << contents;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("rename failed: " + target.string());
}

std::string run_csv(const RunLog& log) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const StepRecord& rec : log.records) {
    out << rec.t << ',' << format_double(rec.cost) << ','
        << format_double(rec.cum_regret) << ','
        << format_double(rec.state_norm) << ',' << rec.policy_id << ','
        << format_double(rec.est_error) << ','
        << format_double(rec.lambda_min_v) << ',';
    if (rec.optimistic) out << (*rec.optimistic ? 1 : 0);
    out << "\n";
  }
  return out.str();
}

std::vector<double> read_regret_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV: " + path);
  // Locate the cum_regret column from the header.
  int col = -1;
  {
    std::stringstream hs(line);
    std::string field;
    for (int i = 0; std::getline(hs, field, ','); ++i)
      if (field == "cum_regret") col = i;
  }
  if (col < 0) throw IoError("CSV missing cum_regret column: " + path);
  std::vector<double> curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string field;
    for (int i = 0; i <= col; ++i)
      if (!std::getline(ls, field, ','))
        throw IoError("short CSV row in " + path);
    curve.push_back(std::stod(field));
  }
  return curve;
}

namespace {

StabilizabilityParams parse_stab(const Json& config) {
  if (!config.contains("stabilizability"))
    throw ConfigError("config: missing 'stabilizability' section");
  const Json& s = config.at("stabilizability");
  StabilizabilityParams stab;
  stab.kappa = require_number(s.at("kappa"), "stabilizability.kappa");
  stab.gamma = require_number(s.at("gamma"), "stabilizability.gamma");
  stab.s_bound = require_number(s.at("s_bound"), "stabilizability.s_bound");
  return stab;
}

}  // namespace

Json dare_report(const Json& config) {
  if (!config.contains("plant"))
    throw ConfigError("config: missing 'plant' section");
  PlantConfig plant = parse_plant_json(config.at("plant"));
  plant.validate();
  DareOptions opt;
  opt.sigma_w = plant.sigma_w;
  if (config.contains("tol")) opt.tol = require_number(config.at("tol"), "tol");
  if (config.contains("max_iter")) opt.max_iter = config.at("max_iter").get<int>();
  DareResult res = solve_dare(plant.sys, plant.cost, opt);
  Json out;
  out["status"] = to_string(res.status);
  out["iterations"] = res.sol.iterations;
  if (res.ok()) {
    out["p"] = matrix_to_json(res.sol.p);
    out["k"] = matrix_to_json(res.sol.k);
    out["j"] = res.sol.j;
    out["residual"] = res.sol.residual;
    out["rho_cl"] = spectral_radius(closed_loop(plant.sys, res.sol.k));
  }
  return out;
}

Json check_system_report(const Json& config) {
  if (!config.contains("plant"))
    throw ConfigError("config: missing 'plant' section");
  PlantConfig plant = parse_plant_json(config.at("plant"));
  plant.validate();
  StabilizabilityParams stab = parse_stab(config);
  double delta = config.contains("delta")
                     ? require_number(config.at("delta"), "delta")
                     : 0.05;
  long horizon =
      config.contains("horizon") ? config.at("horizon").get<long>() : 200;
  const int n = plant.sys.n();
  const int dd = plant.sys.d();
  long tau0 = config.contains("tau0")
                  ? config.at("tau0").get<long>()
                  : TsacConfig::default_tau0(stab.kappa, stab.gamma);
  long t_w = config.contains("t_w")
                 ? config.at("t_w").get<long>()
                 : TsacConfig::default_t_w(horizon, n, dd, 0.5);
  double xs =
      TsacConfig::x_s_bound(stab, plant.sigma_w, n, horizon, t_w, delta);
  double mu = config.contains("mu") ? require_number(config.at("mu"), "mu")
                                    : (1.0 + stab.kappa * stab.kappa) * xs * xs;

  MembershipReport rep = membership_in_S(plant.sys, plant.cost, stab);
  Json out;
  out["member"] = rep.member;
  out["reason"] = to_string(rep.reason);
  out["theta_fro"] = rep.theta_fro;
  out["gain_norm"] = rep.gain_norm;
  out["rho_cl"] = rep.rho_cl;
  out["tau0"] = tau0;
  out["t_w"] = t_w;
  out["x_s"] = xs;
  out["mu"] = mu;
  out["t0_gate"] = TsacConfig::t0_gate(stab, plant.cost, plant.sigma_w, n, dd,
                                       horizon, t_w, delta, mu);
  out["t_r"] = static_cast<double>(t_w) +
               (n + dd) * tau0 * std::log(static_cast<double>(n + dd));
  return out;
}

Json optimism_mc_report(const Json& config) {
  if (!config.contains("plant"))
    throw ConfigError("config: missing 'plant' section");
  PlantConfig plant = parse_plant_json(config.at("plant"));
  plant.validate();
  StabilizabilityParams stab = parse_stab(config);
  double delta = config.contains("delta")
                     ? require_number(config.at("delta"), "delta")
                     : 0.05;
  double mu =
      config.contains("mu") ? require_number(config.at("mu"), "mu") : 1.0;
  long draws =
      config.contains("draws") ? config.at("draws").get<long>() : 10000;
  std::uint64_t seed = config.contains("seed")
                           ? config.at("seed").get<std::uint64_t>()
                           : 1;
  const int n = plant.sys.n();
  const int dd = plant.sys.d();

  TsGeometry g;
  g.n = n;
  g.d = dd;
  g.theta_hat = config.contains("theta_hat")
                    ? parse_matrix(config.at("theta_hat"), "theta_hat")
                    : plant.sys.theta();
  Matrix v;
  if (config.contains("v")) {
    v = parse_matrix(config.at("v"), "v");
  } else {
    double scale = config.contains("v_scale")
                       ? require_number(config.at("v_scale"), "v_scale")
                       : mu;
    v = scale * Matrix::Identity(n + dd, n + dd);
  }
  g.v_inv_sqrt = sym_inv_sqrt(v);
  if (config.contains("beta")) {
    g.beta = require_number(config.at("beta"), "beta");
  } else {
    double log_det_ratio = 0.5 * (log_det_spd(v) - (n + dd) * std::log(mu)) +
                           std::log(1.0 / delta);
    g.beta = plant.sigma_w * std::sqrt(2.0 * n * log_det_ratio) +
             std::sqrt(mu) * stab.s_bound;
  }

  GaussianStream rng(seed);
  long optimistic = 0, accepted = 0, exhausted = 0;
  for (long i = 0; i < draws; ++i) {
    TsSampleResult s = ts_sample(g, stab, plant.cost, rng);
    if (!s.ok()) {
      ++exhausted;
      continue;
    }
    ++accepted;
    OptimismCheck check =
        is_optimistic(s.sample.theta, plant.sys, plant.cost, plant.sigma_w);
    if (check.status == SolveStatus::Ok && check.optimistic) ++optimistic;
  }
  Json out;
  out["draws"] = draws;
  out["accepted"] = accepted;
  out["exhausted"] = exhausted;
  out["p_opt"] = accepted > 0 ? static_cast<double>(optimistic) / accepted : 0.0;
  out["q1_reference"] = 0.15865525393145705;  // Q(1) = 1 - Phi(1)
  out["beta"] = g.beta;
  return out;
}

Json slope_report_from_files(const std::vector<std::string>& csv_paths,
                             long t_min) {
  if (csv_paths.empty())
    throw InsufficientDataError("slope: no input files");
  std::vector<std::vector<double>> curves;
  curves.reserve(csv_paths.size());
  for (const auto& p : csv_paths) curves.push_back(read_regret_curve_csv(p));
  std::size_t len = curves[0].size();
  for (const auto& c : curves) len = std::min(len, c.size());
  if (t_min <= 0) t_min = std::max<long>(1, static_cast<long>(len) / 10);
  SlopeFit fit = fit_regret_slope(curves, t_min);
  Json out;
  out["slope"] = fit.slope;
  out["ci_lo"] = fit.ci_lo;
  out["ci_hi"] = fit.ci_hi;
  out["points"] = fit.points;
  out["t_min"] = t_min;
  out["curves"] = csv_paths.size();
  return out;
}

}  // namespace tsac
