#pragma once

#include <span>
#include <string>
#include <vector>

#include "gradcaps/config.hpp"
#include "gradcaps/metrics.hpp"

namespace gradcaps {

inline constexpr const char* kCodeVersion = "0.1.0";

// Fixed metrics CSV column set, one row per evaluation point.
inline constexpr const char* kMetricsCsvHeader =
    "step,seed,eval_mean_return,eval_std,action_fluctuation,lipschitz_k1,"
    "lipschitz_k2,actor_loss,critic_loss,temporal_loss";

struct SeedResult {
  uint64_t seed = 0;
  double best_return = 0.0;
  double best_return_std = 0.0;
  double final_fluctuation = 0.0;
  double final_lipschitz_k1 = 0.0;
  double final_lipschitz_k2 = 0.0;
  double wall_seconds = 0.0;
  std::string metrics_csv;  // file names relative to the run dir
  std::string checkpoint;
  std::string trace_csv;
};

struct RunManifest {
  std::string run_dir;
  std::string run_id;
  std::string config_hash;
  std::string code_version;
  std::string config_toml;
  std::vector<SeedResult> seeds;
  std::vector<std::string> files;  // every file the run wrote, relative

  RunConfig config() const { return RunConfig::from_toml(config_toml); }
  double mean_best_return() const;
  double std_best_return() const;
  double mean_fluctuation() const;
};

// Result of training one seed; metrics rows are also streamed to the CSV.
struct TrainResult {
  SeedResult seed_result;
  PolicySnapshot best_policy;
};

// Trains a single seed and writes metrics_seed<seed>.csv under run_dir.
// Deterministic per (config, seed).
TrainResult train_one_seed(const RunConfig& cfg, uint64_t seed,
                           const std::string& run_dir);

// Trains every seed in the config, writes checkpoints, traces, and the run
// manifest. If the run directory already holds a manifest for the identical
// config hash the stored manifest is returned (idempotent re-run); a
// manifest with a different hash is a run-id collision and a ConfigError.
RunManifest run_experiment(const RunConfig& cfg);

RunManifest load_manifest(const std::string& run_dir);

// lambda_t sweep over {caps, gradcaps_norm} for every grid value. Returns
// the sweep report path.
std::string ablate_lambda(const RunConfig& base, std::span<const double> grid);

// Per-sequence loss table for a CSV of scalar action sequences.
// mode: all | caps | gradcaps_raw | gradcaps_div | gradcaps_tanh.
std::string loss_inspect_text(const std::string& csv_text, const std::string& mode,
                              Aggregation aggregation, double epsilon_div,
                              double epsilon_tanh);

// Comparison table + overlay data + SVG charts for completed runs of the
// same environment. Returns the report table path.
std::string emit_report(std::span<const std::string> run_dirs,
                        const std::string& out_dir);

}  // namespace gradcaps
