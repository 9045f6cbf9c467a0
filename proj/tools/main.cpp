// gradcaps command line: train / eval / ablate-lambda / loss-inspect / report.
// Talks to the library exclusively through the C ABI in gradcaps/capi.h.
// Exit codes: 0 success, 1 configuration error, 2 runtime abort.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gradcaps/capi.h"

namespace {

int exit_code_for(gc_status s) {
  switch (s) {
    case GC_OK: return 0;
    case GC_ERR_INVALID_ARGUMENT:
    case GC_ERR_CONFIG: return 1;
    case GC_ERR_RUNTIME: return 2;
  }
  return 2;
}

int report_failure(gc_status s) {
  std::fprintf(stderr, "error (%s): %s\n", gc_status_name(s), gc_last_error());
  return exit_code_for(s);
}

struct ConfigHandle {
  gc_config* cfg = nullptr;
  ~ConfigHandle() { gc_config_free(cfg); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradcaps: action-smoothness regularization lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gc_version()));

  std::string config_path, checkpoint_path, input_path, out_dir;
  std::string mode = "all", aggregation = "sqrt_sum_sq";
  double epsilon_div = 0.0, epsilon_tanh = 1e-3;
  uint64_t seed = 0;
  bool seed_set = false;
  int episodes = 10;
  std::vector<double> grid = {0.05, 0.1, 0.5, 1.0, 2.0, 3.0};
  std::vector<std::string> run_dirs;

  CLI::App* train = app.add_subcommand("train", "Train every seed in a run config");
  train->add_option("--config", config_path, "Run config (.toml or .json)")->required();
  train->add_option("--seed", seed, "Override the config's seed list with one seed")
      ->each([&seed_set](const std::string&) { seed_set = true; });

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a policy checkpoint");
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint .json")->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes (default 10)");

  CLI::App* ablate =
      app.add_subcommand("ablate-lambda", "Sweep lambda_t for caps and gradcaps_norm");
  ablate->add_option("--config", config_path, "Base run config")->required();
  ablate->add_option("--grid", grid, "Lambda grid values");

  CLI::App* inspect =
      app.add_subcommand("loss-inspect", "Loss table for CSV action sequences");
  inspect->add_option("--input", input_path, "CSV with one sequence per row")->required();
  inspect->add_option("--mode", mode,
                      "all|caps|gradcaps_raw|gradcaps_div|gradcaps_tanh");
  inspect->add_option("--aggregation", aggregation, "sqrt_sum_sq|mean");
  inspect->add_option("--epsilon-div", epsilon_div, "Division-mode epsilon (>= 0)");
  inspect->add_option("--epsilon-tanh", epsilon_tanh, "Tanh-mode epsilon (> 0)");

  CLI::App* report = app.add_subcommand("report", "Comparison report for finished runs");
  report->add_option("--runs", run_dirs, "Run directories")->required();
  report->add_option("--out", out_dir, "Report output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (train->parsed() || ablate->parsed()) {
    ConfigHandle handle;
    gc_status s = gc_config_load(config_path.c_str(), &handle.cfg);
    if (s != GC_OK) return report_failure(s);
    if (seed_set && (s = gc_config_override_seed(handle.cfg, seed)) != GC_OK)
      return report_failure(s);

    char* path = nullptr;
    if (train->parsed()) {
      s = gc_run_experiment(handle.cfg, &path);
      if (s != GC_OK) return report_failure(s);
      std::printf("manifest: %s\n", path);
    } else {
      s = gc_ablate_lambda(handle.cfg, grid.data(), grid.size(), &path);
      if (s != GC_OK) return report_failure(s);
      std::printf("sweep report: %s\n", path);
    }
    gc_string_free(path);
    return 0;
  }

  if (eval->parsed()) {
    double mean = 0, stddev = 0, fluct = 0;
    gc_status s =
        gc_eval_checkpoint(checkpoint_path.c_str(), episodes, &mean, &stddev, &fluct);
    if (s != GC_OK) return report_failure(s);
    std::printf("episodes: %d\nmean_return: %.17g\nstd_return: %.17g\n"
                "action_fluctuation: %.17g\n",
                episodes, mean, stddev, fluct);
    return 0;
  }

  if (inspect->parsed()) {
    char* table = nullptr;
    gc_status s = gc_loss_inspect(input_path.c_str(), mode.c_str(), aggregation.c_str(),
                                  epsilon_div, epsilon_tanh, &table);
    if (s != GC_OK) return report_failure(s);
    std::fputs(table, stdout);
    gc_string_free(table);
    return 0;
  }

  if (report->parsed()) {
    std::vector<const char*> dirs;
    for (const auto& d : run_dirs) dirs.push_back(d.c_str());
    char* path = nullptr;
    gc_status s = gc_emit_report(dirs.data(), dirs.size(), out_dir.c_str(), &path);
    if (s != GC_OK) return report_failure(s);
    std::printf("report: %s\n", path);
    gc_string_free(path);
    return 0;
  }
  return 0;
}
