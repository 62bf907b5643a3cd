// Command-line front end for the tsac shared library. All functionality is
// reached through the C API in tsac/tsac.h; this file only handles argument
// parsing, config-file overrides, and output formatting.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tsac/tsac.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

int exit_code_for(tsac_status s) {
  switch (s) {
    case TSAC_OK: return kExitOk;
    case TSAC_ERR_INVALID_ARG:
    case TSAC_ERR_CONFIG:
    case TSAC_ERR_INSUFFICIENT_DATA: return kExitConfig;
    case TSAC_ERR_IO: return kExitIo;
    default: return kExitNumerical;
  }
}

int report_failure(tsac_status s) {
  std::cerr << "error: " << tsac_last_error() << "\n";
  return exit_code_for(s);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  tsac_string_free(s);
  return out;
}

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  int threads = 0;
  std::string format = "text";  // text, json, csv
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Config file (JSON)");
  cmd->add_option("--seed", opts.seed, "Base seed override");
  cmd->add_option("--out-dir", opts.out_dir, "Artifact directory");
  cmd->add_option("--threads", opts.threads, "Worker thread bound");
  cmd->add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"text", "json", "csv"}));
}

// Loads the config file (or an empty object), exits with code 2/3 on error.
json load_config(const CommonOpts& opts, bool required) {
  if (opts.config_path.empty()) {
    if (required) {
      std::cerr << "error: --config is required for this subcommand\n";
      std::exit(kExitConfig);
    }
    return json::object();
  }
  std::ifstream in(opts.config_path);
  if (!in) {
    std::cerr << "error: cannot open config file: " << opts.config_path
              << "\n";
    std::exit(kExitIo);
  }
  try {
    json j;
    in >> j;
    return j;
  } catch (const std::exception& e) {
    std::cerr << "error: config parse: " << e.what() << "\n";
    std::exit(kExitConfig);
  }
}

void apply_common_overrides(json& cfg, const CommonOpts& opts) {
  if (opts.seed != 0) cfg["base_seed"] = opts.seed;
  if (!opts.out_dir.empty()) cfg["out_dir"] = opts.out_dir;
  if (opts.threads > 0) cfg["threads"] = opts.threads;
}

void print_kv_report(const json& report, const std::string& format) {
  if (format == "json") {
    std::cout << report.dump(2) << "\n";
    return;
  }
  const char* sep = format == "csv" ? "," : ": ";
  for (const auto& [key, value] : report.items()) {
    if (value.is_array()) {
      std::cout << key << sep;
      for (std::size_t r = 0; r < value.size(); ++r) {
        if (r) std::cout << (format == "csv" ? ";" : " ; ");
        if (value[r].is_array()) {
          for (std::size_t c = 0; c < value[r].size(); ++c) {
            if (c) std::cout << (format == "csv" ? " " : " ");
            std::cout << value[r][c].dump();
          }
        } else {
          std::cout << value[r].dump();
        }
      }
      std::cout << "\n";
    } else {
      std::cout << key << sep << value.dump() << "\n";
    }
  }
}

json parse_or_die(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const std::exception& e) {
    std::cerr << "error: malformed report: " << e.what() << "\n";
    std::exit(kExitNumerical);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thompson-sampling adaptive LQR control: benchmarks and "
               "diagnostics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tsac_version()));

  // run -------------------------------------------------------------------
  CommonOpts run_opts;
  std::string run_controller;
  auto* run_cmd = app.add_subcommand("run", "Single episode with step CSV");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--controller", run_controller,
                      "Controller kind (tsac, ts_lqr, ofulq, stabl, cec)");

  // bench -----------------------------------------------------------------
  CommonOpts bench_opts;
  std::optional<long> bench_runs, bench_horizon;
  auto* bench_cmd = app.add_subcommand("bench", "Multi-run benchmark");
  add_common(bench_cmd, bench_opts);
  bench_cmd->add_option("--runs", bench_runs, "Run count override");
  bench_cmd->add_option("--horizon", bench_horizon, "Horizon override");

  // dare ------------------------------------------------------------------
  CommonOpts dare_opts;
  std::string dare_system;
  auto* dare_cmd =
      app.add_subcommand("dare", "Print P, K, J, rho_cl for a system");
  add_common(dare_cmd, dare_opts);
  dare_cmd->add_option("--system", dare_system,
                       "Builtin plant name (boeing747, scalar)");

  // check-system ----------------------------------------------------------
  CommonOpts check_opts;
  std::string check_system;
  auto* check_cmd = app.add_subcommand(
      "check-system", "Membership report with tau0, T0, X_s diagnostics");
  add_common(check_cmd, check_opts);
  check_cmd->add_option("--system", check_system, "Builtin plant name");

  // optimism --------------------------------------------------------------
  CommonOpts opt_opts;
  long opt_draws = 0;
  auto* opt_cmd = app.add_subcommand(
      "optimism", "Monte-Carlo optimistic-sampling probability");
  add_common(opt_cmd, opt_opts);
  opt_cmd->add_option("--draws", opt_draws, "Sample count override");

  // slope -----------------------------------------------------------------
  CommonOpts slope_opts;
  std::vector<std::string> slope_files;
  std::string slope_dir;
  long slope_tmin = 0;
  auto* slope_cmd =
      app.add_subcommand("slope", "Regret-slope fit over emitted CSVs");
  add_common(slope_cmd, slope_opts);
  slope_cmd->add_option("files", slope_files, "Per-step CSV files");
  slope_cmd->add_option("--dir", slope_dir, "Directory of *_run*.csv files");
  slope_cmd->add_option("--t-min", slope_tmin, "Fit start step (default T/10)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (run_cmd->parsed()) {
    json cfg = load_config(run_opts, /*required=*/true);
    apply_common_overrides(cfg, run_opts);
    std::string csv_path;
    if (!run_opts.out_dir.empty()) {
      std::error_code ec;
      fs::create_directories(run_opts.out_dir, ec);
      std::string label = run_controller.empty() ? "run" : run_controller;
      csv_path = run_opts.out_dir + "/" + label + "_run0.csv";
    }
    char* out = nullptr;
    tsac_status s = tsac_episode_run(
        cfg.dump().c_str(),
        run_controller.empty() ? nullptr : run_controller.c_str(),
        run_opts.seed, csv_path.empty() ? nullptr : csv_path.c_str(), &out);
    if (s != TSAC_OK) return report_failure(s);
    json report = parse_or_die(take(out));
    if (run_opts.format == "json") {
      std::cout << report.dump(2) << "\n";
    } else {
      std::cout << "controller" << (run_opts.format == "csv" ? "," : ": ")
                << report["controller"].get<std::string>() << "\n";
      for (const char* key : {"regret", "max_state_norm", "steps", "diverged",
                              "j_star"})
        std::cout << key << (run_opts.format == "csv" ? "," : ": ")
                  << report[key].dump() << "\n";
      if (!csv_path.empty()) std::cout << "csv: " << csv_path << "\n";
    }
    return kExitOk;
  }

  if (bench_cmd->parsed()) {
    json cfg = load_config(bench_opts, /*required=*/true);
    apply_common_overrides(cfg, bench_opts);
    if (bench_runs) cfg["runs"] = *bench_runs;
    if (bench_horizon) cfg["horizon"] = *bench_horizon;
    char* out = nullptr;
    tsac_status s = tsac_bench_run(cfg.dump().c_str(), &out);
    if (s != TSAC_OK) return report_failure(s);
    json summary = parse_or_die(take(out));
    if (bench_opts.format == "json") {
      std::cout << summary.dump(2) << "\n";
    } else {
      std::cout << "runs: " << summary["runs"].dump()
                << "  horizon: " << summary["horizon"].dump() << "\n";
      for (const auto& [label, c] : summary["controllers"].items()) {
        std::cout << label << ": avg_regret=" << c["avg_regret"].dump()
                  << " top95=" << c["top95_regret"].dump()
                  << " top90=" << c["top90_regret"].dump()
                  << " avg_max_norm=" << c["avg_max_norm"].dump()
                  << " diverged=" << c["diverged"].dump();
        if (c.contains("p_opt")) std::cout << " p_opt=" << c["p_opt"].dump();
        std::cout << "\n";
      }
    }
    return kExitOk;
  }

  auto run_report = [&](const CommonOpts& opts, const std::string& system,
                        auto fn, long draws) -> int {
    json cfg = load_config(opts, /*required=*/system.empty());
    if (!system.empty()) cfg["plant"] = {{"builtin", system}};
    if (opts.seed != 0) cfg["seed"] = opts.seed;
    if (draws > 0) cfg["draws"] = draws;
    char* out = nullptr;
    tsac_status s = fn(cfg.dump().c_str(), &out);
    if (s != TSAC_OK) return report_failure(s);
    print_kv_report(parse_or_die(take(out)), opts.format);
    return kExitOk;
  };

  if (dare_cmd->parsed())
    return run_report(dare_opts, dare_system, tsac_dare_report, 0);
  if (check_cmd->parsed())
    return run_report(check_opts, check_system, tsac_check_system, 0);
  if (opt_cmd->parsed())
    return run_report(opt_opts, "", tsac_optimism_mc, opt_draws);

  if (slope_cmd->parsed()) {
    std::vector<std::string> files = slope_files;
    if (!slope_dir.empty()) {
      std::error_code ec;
      for (const auto& entry : fs::directory_iterator(slope_dir, ec)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 4 && name.substr(name.size() - 4) == ".csv" &&
            name.find("_run") != std::string::npos)
          files.push_back(entry.path().string());
      }
      if (ec) {
        std::cerr << "error: cannot read directory: " << slope_dir << "\n";
        return kExitIo;
      }
      std::sort(files.begin(), files.end());
    }
    if (files.empty()) {
      std::cerr << "error: no input CSV files\n";
      return kExitConfig;
    }
    std::vector<const char*> raw;
    raw.reserve(files.size());
    for (const auto& f : files) raw.push_back(f.c_str());
    char* out = nullptr;
    tsac_status s =
        tsac_slope_fit_files(raw.data(), raw.size(), slope_tmin, &out);
    if (s != TSAC_OK) return report_failure(s);
    print_kv_report(parse_or_die(take(out)), slope_opts.format);
    return kExitOk;
  }

  return kExitConfig;
}
