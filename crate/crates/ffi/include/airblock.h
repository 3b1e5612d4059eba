#ifndef AIRBLOCK_H
#define AIRBLOCK_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every `ab_*` call.
 */
typedef enum AbStatus {
  AB_STATUS_OK = 0,
  AB_STATUS_NULL_POINTER = 1,
  AB_STATUS_PARSE = 2,
  AB_STATUS_INVALID_CONFIG = 3,
  AB_STATUS_SAFETY_VIOLATED = 4,
  AB_STATUS_INVALID_ARGUMENT = 5,
  AB_STATUS_OUT_OF_RANGE = 6,
  AB_STATUS_INTERNAL = 7,
  AB_STATUS_PANIC = 8,
} AbStatus;

/**
 * Parsed and validated scenario.
 */
typedef struct AbScenario AbScenario;

/**
 * Completed simulation run.
 */
typedef struct AbTrace AbTrace;

/**
 * One trace event. `other` is -1 when the event has no counterpart.
 */
typedef struct AbEvent {
  double time;
  uint64_t step;
  /**
   * Index into the kinds listed by `ab_event_kind_name`.
   */
  uint32_t kind;
  /**
   * Zero-based airplane index.
   */
  uint32_t agent;
  int32_t other;
} AbEvent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next `ab_*` call on the same thread.
 */
const char *ab_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ab_version(void);

/**
 * Parses a scenario document (UTF-8 JSON). On success `*out` owns a new
 * handle to be released with `ab_scenario_free`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum AbStatus ab_scenario_from_json(const char *json, struct AbScenario **out);

/**
 * Releases a scenario. Null is ignored.
 *
 * # Safety
 * `scenario` must come from `ab_scenario_from_json` and not be used again.
 */
void ab_scenario_free(struct AbScenario *scenario);

/**
 * # Safety
 * `scenario` must be a live handle and `out` writable.
 */
enum AbStatus ab_scenario_agent_count(const struct AbScenario *scenario, size_t *out);

/**
 * Runs the scenario to completion or horizon. On success `*out` owns a new
 * trace handle to be released with `ab_trace_free`.
 *
 * # Safety
 * `scenario` must be a live handle and `out` writable.
 */
enum AbStatus ab_simulate(const struct AbScenario *scenario, struct AbTrace **out);

/**
 * Releases a trace. Null is ignored.
 *
 * # Safety
 * `trace` must come from `ab_simulate` and not be used again.
 */
void ab_trace_free(struct AbTrace *trace);

/**
 * # Safety
 * `trace` must be a live handle and `out` writable.
 */
enum AbStatus ab_trace_step_count(const struct AbTrace *trace, size_t *out);

/**
 * # Safety
 * `trace` must be a live handle and `out` writable.
 */
enum AbStatus ab_trace_agent_count(const struct AbTrace *trace, size_t *out);

/**
 * Position and heading of `agent` at `step`.
 *
 * # Safety
 * `trace` must be a live handle; `x`, `y` and `heading` writable.
 */
enum AbStatus ab_trace_state(const struct AbTrace *trace,
                             size_t step,
                             size_t agent,
                             double *x,
                             double *y,
                             double *heading);

/**
 * Smallest pairwise separation seen over the run, m.
 *
 * # Safety
 * `trace` must be a live handle and `out` writable.
 */
enum AbStatus ab_trace_min_separation(const struct AbTrace *trace, double *out);

/**
 * # Safety
 * `trace` must be a live handle and `out` writable.
 */
enum AbStatus ab_trace_event_count(const struct AbTrace *trace, size_t *out);

/**
 * # Safety
 * `trace` must be a live handle and `out` writable.
 */
enum AbStatus ab_trace_event(const struct AbTrace *trace, size_t index, struct AbEvent *out);

/**
 * Static name of an event kind code, or null if the code is unknown.
 */
const char *ab_event_kind_name(uint32_t kind);

/**
 * Renders the trace as CSV. `*out` receives a string to be released with
 * `ab_string_free`.
 *
 * # Safety
 * `trace` must be a live handle and `out` writable.
 */
enum AbStatus ab_trace_to_csv(const struct AbTrace *trace, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from an `ab_*` function documented to return an owned string.
 */
void ab_string_free(char *s);

/**
 * Closed-form safety filter for one airplane against one other.
 * `preference` is +1 or -1 and picks the side when the cruising heading
 * points straight at the other airplane.
 *
 * # Safety
 * `theta_out` must be writable; `activated_out` may be null.
 */
enum AbStatus ab_filter_heading(double px_i,
                                double py_i,
                                double px_j,
                                double py_j,
                                double phi,
                                double r,
                                double alpha,
                                double speed,
                                int32_t preference,
                                double *theta_out,
                                bool *activated_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AIRBLOCK_H */
