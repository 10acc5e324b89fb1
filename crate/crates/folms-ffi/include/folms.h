/* C interface to the folms adaptive-filter laboratory. */

#ifndef FOLMS_H
#define FOLMS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum FolmsStatus {
  FOLMS_STATUS_OK = 0,
  // A required pointer argument was NULL.
  FOLMS_STATUS_NULL_ARGUMENT = 1,
  // Configuration text or a parameter value failed to parse/validate.
  FOLMS_STATUS_INVALID_CONFIG = 2,
  // Every Monte Carlo replica diverged.
  FOLMS_STATUS_DIVERGED = 3,
  // No stable step sizes exist in the search box.
  FOLMS_STATUS_INFEASIBLE = 4,
  // Unknown parameter key.
  FOLMS_STATUS_UNKNOWN_KEY = 5,
  // Internal panic (a bug; the call had no effect).
  FOLMS_STATUS_PANIC = 6,
} FolmsStatus;

// Opaque system-parameter handle.
typedef struct FolmsParams FolmsParams;

// Step-size triple.
typedef struct FolmsStepSizes {
  double mu_w;
  double mu_eps;
  double mu_eta;
} FolmsStepSizes;

// Steady-state EMSE prediction.
typedef struct FolmsEmse {
  double zeta_w;
  double zeta_eps;
  double zeta_eta;
  double zeta_total;
  double mse;
  double gamma;
  // Nonzero when gamma > 0 and all terms are finite.
  int valid;
} FolmsEmse;

// Monte Carlo outcome.
typedef struct FolmsSimResult {
  // Mean steady-state EMSE across surviving replicas, watts.
  double emse_w;
  // Standard error across replicas, watts.
  double stderr_w;
  // Replicas excluded after divergence.
  uint32_t diverged;
} FolmsSimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parameters of the stationary reference link.
struct FolmsParams *folms_params_default(void);

// Parameters of the fully drifting reference setup.
struct FolmsParams *folms_params_drifting(void);

// Build parameters from experiment-config TOML (the `[system]` section of
// the text is honored; other sections are ignored here). Returns NULL on
// parse failure.
//
// # Safety
// `toml_text` must be a valid NUL-terminated UTF-8 string.
struct FolmsParams *folms_params_from_toml(const char *toml_text);

// Release a parameter handle.
//
// # Safety
// `params` must come from a `folms_params_*` constructor and not already be
// freed. NULL is ignored.
void folms_params_free(struct FolmsParams *params);

// Set a scalar parameter by its config-file key. Integer-valued fields
// (`channel_taps`, `filter_taps`, `oversampling`) round to the nearest
// integer.
//
// # Safety
// `params` must be a live handle; `key` a NUL-terminated UTF-8 string.
enum FolmsStatus folms_params_set(struct FolmsParams *params, const char *key, double value);

// Read a scalar parameter by key.
//
// # Safety
// As [`folms_params_set`]; `out` must point to a writable double.
enum FolmsStatus folms_params_get(const struct FolmsParams *params, const char *key, double *out);

// Closed-form steady-state EMSE at the given step sizes. `complete`
// selects the complete expressions (nonzero) or the small-step-size
// approximations (zero).
//
// # Safety
// All pointers must be valid; `out` writable.
enum FolmsStatus folms_predict_emse(const struct FolmsParams *params,
                                    const struct FolmsStepSizes *steps,
                                    int complete,
                                    struct FolmsEmse *out);

// Solve for the step sizes minimizing the predicted total EMSE. Negative
// pin values leave a coordinate free; non-negative values pin it.
//
// # Safety
// `params` live; `out_steps`/`out_pred` writable or NULL to skip.
enum FolmsStatus folms_optimal_step_sizes(const struct FolmsParams *params,
                                          double pin_mu_w,
                                          double pin_mu_eps,
                                          double pin_mu_eta,
                                          struct FolmsStepSizes *out_steps,
                                          struct FolmsEmse *out_pred);

// Monte Carlo estimate of the steady-state EMSE of the fixed-step
// estimator at the given step sizes: `replicas` independent runs of
// `iterations` measured samples after a `preroll` exclusion, averaged.
//
// # Safety
// `params` live; `steps` valid; `out` writable.
enum FolmsStatus folms_simulate_emse(const struct FolmsParams *params,
                                     const struct FolmsStepSizes *steps,
                                     uint64_t seed,
                                     uint32_t replicas,
                                     uint32_t iterations,
                                     uint32_t preroll,
                                     struct FolmsSimResult *out);

// Library version as a static NUL-terminated string.
const char *folms_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOLMS_H */
