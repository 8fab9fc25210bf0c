#ifndef SSEC_H
#define SSEC_H

/* Generated by cbindgen from the ssec-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every API call.
typedef enum SsecStatus {
  // Success.
  SSEC_STATUS_OK = 0,
  // A required pointer was null or a bound was zero.
  SSEC_STATUS_INVALID_ARGUMENT = 1,
  // A source was not valid UTF-8.
  SSEC_STATUS_UTF8_ERROR = 2,
  // The sources did not parse or validate; inspect the diagnostics JSON.
  SSEC_STATUS_VALIDATION_ERROR = 3,
  // The analysis rejected the model (for example a property erased by
  // abstraction); inspect the diagnostics JSON.
  SSEC_STATUS_ANALYSIS_ERROR = 4,
  // Internal failure.
  SSEC_STATUS_INTERNAL = 5,
} SsecStatus;

// Opaque parsed-and-validated model.
typedef struct SsecModel SsecModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string; do not free.
const char *ssec_version(void);

// Free a string returned by any function of this library.
//
// # Safety
// `s` must have been returned by this library and not freed before.
void ssec_string_free(char *s);

// Free a model handle.
//
// # Safety
// `model` must have been returned by `ssec_model_parse` and not freed
// before.
void ssec_model_free(struct SsecModel *model);

// Parse `count` UTF-8 sources (with display names) and validate the merged
// model. On success `*out_model` owns the handle. Diagnostics, including
// warnings, are always written to `*out_diagnostics_json` when the pointer
// is non-null.
//
// # Safety
// `sources` and `names` must point to `count` valid NUL-terminated strings;
// `out_model` must be a valid pointer.
enum SsecStatus ssec_model_parse(const char *const *sources,
                                 const char *const *names,
                                 size_t count,
                                 struct SsecModel **out_model,
                                 char **out_diagnostics_json);

// Requirement traceability report as JSON.
//
// # Safety
// `model` must be a live handle; `out_json` a valid pointer.
enum SsecStatus ssec_traceability_json(const struct SsecModel *model, char **out_json);

// Attack coverage, achievability, and up to `max_traces` orderings per
// root, as JSON.
//
// # Safety
// `model` must be a live handle; `out_json` a valid pointer.
enum SsecStatus ssec_attacks_json(const struct SsecModel *model,
                                  uint32_t max_traces,
                                  char **out_json);

// Verify all declared properties with the built-in bounded engine. Zero
// bounds select the defaults (sessions 2, steps 40, depth 6).
//
// # Safety
// `model` must be a live handle; `out_json` a valid pointer.
enum SsecStatus ssec_verify_json(const struct SsecModel *model,
                                 uint32_t sessions,
                                 uint32_t steps,
                                 uint32_t depth,
                                 char **out_json);

// Emit the applied-pi specification text (not JSON); it already passed the
// internal grammar and scope self-check.
//
// # Safety
// `model` must be a live handle; `out_text` a valid pointer.
enum SsecStatus ssec_emit_pv(const struct SsecModel *model, int injective, char **out_text);

// Bus load, processor utilization and channel latency estimates as JSON.
//
// # Safety
// `model` must be a live handle; `out_json` a valid pointer.
enum SsecStatus ssec_estimate_json(const struct SsecModel *model, char **out_json);

// Consolidated report over every analysis, as JSON with a versioned schema.
// Zero bounds select the defaults.
//
// # Safety
// `model` must be a live handle; `out_json` a valid pointer.
enum SsecStatus ssec_report_json(const struct SsecModel *model,
                                 uint32_t sessions,
                                 uint32_t steps,
                                 uint32_t depth,
                                 int injective,
                                 uint32_t max_traces,
                                 char **out_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SSEC_H */
