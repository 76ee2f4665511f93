#ifndef TFPANEL_H
#define TFPANEL_H

/* Generated by cbindgen from tfpanel-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum TfpStatus {
  TfpStatus_Ok = 0,
  TfpStatus_NullArgument = 1,
  TfpStatus_InvalidUtf8 = 2,
  TfpStatus_IoError = 3,
  TfpStatus_InvalidInput = 4,
  TfpStatus_ComputeError = 5,
} TfpStatus;

/**
 * Opaque panel handle.
 */
typedef struct TfpPanel TfpPanel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buffer` (NUL
 * terminated, truncated to `capacity`). Returns the full message length in
 * bytes, excluding the terminator; call with a null buffer to query the
 * needed capacity.
 *
 * # Safety
 * `buffer` must be null or point to at least `capacity` writable bytes.
 */
uintptr_t tfp_last_error(char *buffer, uintptr_t capacity);

/**
 * Load a long-form panel CSV (`entity,period,variable,value`). Returns a
 * handle to free with [`tfp_panel_free`], or null on failure (see
 * [`tfp_last_error`]).
 *
 * # Safety
 * `path` must be a NUL-terminated string valid for the duration of the
 * call.
 */
struct TfpPanel *tfp_panel_load(const char *path);

/**
 * Free a panel handle. Null is a no-op.
 *
 * # Safety
 * `panel` must be a pointer returned by [`tfp_panel_load`] that has not
 * been freed yet.
 */
void tfp_panel_free(struct TfpPanel *panel);

/**
 * Number of entities in the panel; 0 for a null handle.
 *
 * # Safety
 * `panel` must be null or a live handle from [`tfp_panel_load`].
 */
uintptr_t tfp_panel_entity_count(const struct TfpPanel *panel);

/**
 * Number of periods in the panel; 0 for a null handle.
 *
 * # Safety
 * `panel` must be null or a live handle from [`tfp_panel_load`].
 */
uintptr_t tfp_panel_period_count(const struct TfpPanel *panel);

/**
 * Composite efficiency scores (super-efficiency SBM for efficient units)
 * of `n_dmus` observations against their own pooled reference set.
 *
 * `inputs` is row-major `n_dmus x n_inputs`, `good_outputs` row-major
 * `n_dmus x n_good`, `bad_outputs` row-major `n_dmus x n_bad` (may be null
 * when `n_bad` is 0). All values must be strictly positive. `vrs` != 0
 * adds the convexity constraint. `scores_out` receives `n_dmus` values.
 *
 * # Safety
 * The array pointers must reference at least the stated number of
 * readable (respectively writable) doubles.
 */
enum TfpStatus tfp_dea_scores(uintptr_t n_dmus,
                              uintptr_t n_inputs,
                              uintptr_t n_good,
                              uintptr_t n_bad,
                              const double *inputs,
                              const double *good_outputs,
                              const double *bad_outputs,
                              int32_t vrs,
                              double *scores_out);

/**
 * Run the analysis pipeline described by a config file. `out_dir` and
 * `stages` (comma separated) are optional overrides and may be null;
 * `seed_override` points to an optional seed (null keeps the config seed).
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `seed_override` must be
 * null or point to a readable u64.
 */
enum TfpStatus tfp_run_pipeline(const char *config_path,
                                const char *out_dir,
                                const char *stages,
                                const uint64_t *seed_override);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TFPANEL_H */
