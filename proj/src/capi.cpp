#include "gradcaps/capi.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "gradcaps/checkpoint.hpp"
#include "gradcaps/errors.hpp"
#include "gradcaps/runner.hpp"
#include "gradcaps/util.hpp"

using namespace gradcaps;

struct gc_config {
  RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

gc_status fail(gc_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Exceptions map onto the status space: programmer misuse and bad inputs
// are INVALID_ARGUMENT/CONFIG, anything mid-run is RUNTIME.
template <typename Fn>
gc_status guarded(Fn&& fn) {
  try {
    fn();
    return GC_OK;
  } catch (const ConfigError& e) {
    return fail(GC_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(GC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(GC_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(GC_ERR_RUNTIME, "unknown error");
  }
}

}  // namespace

extern "C" {

const char* gc_status_name(gc_status s) {
  switch (s) {
    case GC_OK: return "ok";
    case GC_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case GC_ERR_CONFIG: return "config_error";
    case GC_ERR_RUNTIME: return "runtime_error";
  }
  return "unknown";
}

const char* gc_version(void) { return kCodeVersion; }

const char* gc_last_error(void) { return g_last_error.c_str(); }

void gc_string_free(char* s) { std::free(s); }

gc_status gc_config_load(const char* path, gc_config** out) {
  if (!path || !out) return fail(GC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = new gc_config{RunConfig::load(path)}; });
}

gc_status gc_config_parse(const char* text, const char* format, gc_config** out) {
  if (!text || !format || !out) return fail(GC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string fmt = format;
    if (fmt == "toml") *out = new gc_config{RunConfig::from_toml(text)};
    else if (fmt == "json") *out = new gc_config{RunConfig::from_json(text)};
    else throw std::invalid_argument("format must be toml or json");
  });
}

void gc_config_free(gc_config* cfg) { delete cfg; }

gc_status gc_config_override_seed(gc_config* cfg, uint64_t seed) {
  if (!cfg) return fail(GC_ERR_INVALID_ARGUMENT, "null config");
  cfg->cfg.seeds = {seed};
  return GC_OK;
}

gc_status gc_config_override_output_dir(gc_config* cfg, const char* dir) {
  if (!cfg || !dir) return fail(GC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    cfg->cfg.output_dir = dir;
    cfg->cfg.validate();
  });
}

gc_status gc_config_to_toml(const gc_config* cfg, char** out_text) {
  if (!cfg || !out_text) return fail(GC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out_text = dup_string(cfg->cfg.to_toml()); });
}

gc_status gc_run_experiment(const gc_config* cfg, char** out_manifest_path) {
  if (!cfg) return fail(GC_ERR_INVALID_ARGUMENT, "null config");
  return guarded([&] {
    RunManifest m = run_experiment(cfg->cfg);
    if (out_manifest_path)
      *out_manifest_path = dup_string(m.run_dir + "/manifest.json");
  });
}

gc_status gc_ablate_lambda(const gc_config* cfg, const double* grid, size_t grid_len,
                           char** out_report_path) {
  if (!cfg || (!grid && grid_len > 0))
    return fail(GC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string path =
        ablate_lambda(cfg->cfg, std::span<const double>(grid, grid_len));
    if (out_report_path) *out_report_path = dup_string(path);
  });
}

gc_status gc_eval_checkpoint(const char* checkpoint_path, int episodes,
                             double* out_mean_return, double* out_std_return,
                             double* out_fluctuation) {
  if (!checkpoint_path) return fail(GC_ERR_INVALID_ARGUMENT, "null checkpoint path");
  if (episodes < 1) return fail(GC_ERR_INVALID_ARGUMENT, "episodes must be >= 1");
  return guarded([&] {
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    std::unique_ptr<Env> env = ckpt.env.make();
    Rng eval_rng = derive_stream(ckpt.seed, Stream::EvalEnv);
    ActorFn actor = [&ckpt](std::span<const double> obs, int) {
      return ckpt.policy.act(obs);
    };
    double fluct = 0.0;
    std::vector<double> returns;
    for (int e = 0; e < episodes; ++e) {
      EpisodeTrace trace = record_trace(actor, *env, eval_rng);
      returns.push_back(trace.ret);
      fluct += action_fluctuation(trace);
    }
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= episodes;
    double var = 0.0;
    if (episodes > 1) {
      for (double r : returns) var += (r - mean) * (r - mean);
      var /= (episodes - 1);
    }
    if (out_mean_return) *out_mean_return = mean;
    if (out_std_return) *out_std_return = std::sqrt(var);
    if (out_fluctuation) *out_fluctuation = fluct / episodes;
  });
}

gc_status gc_loss_inspect(const char* csv_path, const char* mode,
                          const char* aggregation, double epsilon_div,
                          double epsilon_tanh, char** out_table) {
  if (!csv_path || !out_table) return fail(GC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string text = read_file(csv_path);
    const Aggregation agg =
        aggregation_from_string(aggregation ? aggregation : "sqrt_sum_sq");
    *out_table = dup_string(
        loss_inspect_text(text, mode ? mode : "all", agg, epsilon_div, epsilon_tanh));
  });
}

gc_status gc_emit_report(const char* const* run_dirs, size_t n_dirs,
                         const char* out_dir, char** out_table_path) {
  if (!run_dirs || n_dirs == 0 || !out_dir)
    return fail(GC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::vector<std::string> dirs;
    for (size_t i = 0; i < n_dirs; ++i) {
      if (!run_dirs[i]) throw std::invalid_argument("null run dir");
      dirs.emplace_back(run_dirs[i]);
    }
    const std::string path = emit_report(dirs, out_dir);
    if (out_table_path) *out_table_path = dup_string(path);
  });
}

}  // extern "C"
