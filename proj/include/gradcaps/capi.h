/* C ABI for the gradcaps experiment library.
 *
 * Conventions: every function returns a gc_status; out-parameters are only
 * written on GC_OK. Strings returned through char** are heap-allocated and
 * must be released with gc_string_free. gc_last_error() describes the most
 * recent failure on the calling thread.
 */
#ifndef GRADCAPS_CAPI_H
#define GRADCAPS_CAPI_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gc_status {
  GC_OK = 0,
  GC_ERR_INVALID_ARGUMENT = 1,
  GC_ERR_CONFIG = 2,
  GC_ERR_RUNTIME = 3,
} gc_status;

const char* gc_status_name(gc_status s);
const char* gc_version(void);
/* Thread-local message for the last failing call on this thread. */
const char* gc_last_error(void);

void gc_string_free(char* s);

/* ------------------------------------------------------------ config -- */

typedef struct gc_config gc_config;

/* Loads a .toml or .json run configuration. */
gc_status gc_config_load(const char* path, gc_config** out);
/* format: "toml" or "json". */
gc_status gc_config_parse(const char* text, const char* format, gc_config** out);
void gc_config_free(gc_config* cfg);

/* Replaces the seed list with a single seed. */
gc_status gc_config_override_seed(gc_config* cfg, uint64_t seed);
gc_status gc_config_override_output_dir(gc_config* cfg, const char* dir);
gc_status gc_config_to_toml(const gc_config* cfg, char** out_text);

/* -------------------------------------------------------- experiments -- */

/* Trains every seed in the config; writes metrics CSVs, checkpoints, traces
 * and manifest.json. Returns the manifest path. */
gc_status gc_run_experiment(const gc_config* cfg, char** out_manifest_path);

/* lambda_t sweep over {caps, gradcaps_norm} x grid. Returns the sweep
 * report path. */
gc_status gc_ablate_lambda(const gc_config* cfg, const double* grid, size_t grid_len,
                           char** out_report_path);

/* Deterministic evaluation of a stored policy checkpoint. */
gc_status gc_eval_checkpoint(const char* checkpoint_path, int episodes,
                             double* out_mean_return, double* out_std_return,
                             double* out_fluctuation);

/* Loss table for a CSV of scalar action sequences (one sequence per row).
 * mode: "all", "caps", "gradcaps_raw", "gradcaps_div", "gradcaps_tanh";
 * aggregation: "sqrt_sum_sq" or "mean". epsilon_div >= 0 feeds the division
 * diagnostic; epsilon_tanh > 0 feeds the tanh-normalized form. */
gc_status gc_loss_inspect(const char* csv_path, const char* mode,
                          const char* aggregation, double epsilon_div,
                          double epsilon_tanh, char** out_table);

/* Comparison table + overlay data for completed runs of one environment.
 * Returns the report table path. */
gc_status gc_emit_report(const char* const* run_dirs, size_t n_dirs,
                         const char* out_dir, char** out_table_path);

#ifdef __cplusplus
}
#endif

#endif /* GRADCAPS_CAPI_H */
