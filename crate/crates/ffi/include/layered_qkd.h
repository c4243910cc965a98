#ifndef LAYERED_QKD_H
#define LAYERED_QKD_H

/* Generated by cbindgen from the layered-qkd-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LqkdStatus {
  LQKD_STATUS_OK = 0,
  LQKD_STATUS_NULL_POINTER = 1,
  LQKD_STATUS_INVALID_ARGUMENT = 2,
  LQKD_STATUS_FAILED = 3,
  LQKD_STATUS_PANIC = 4,
} LqkdStatus;

typedef enum LqkdDecision {
  LQKD_DECISION_ACCEPT = 0,
  LQKD_DECISION_ABORT = 1,
  LQKD_DECISION_INCONCLUSIVE = 2,
} LqkdDecision;

typedef struct LqkdRun LqkdRun;

typedef struct LqkdSession LqkdSession;

typedef struct LqkdState LqkdState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next call into the library from the same thread.
 */
const char *lqkd_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lqkd_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void lqkd_string_free(char *s);

/**
 * Built-in state by id: eq1, eq3, eq6, eq8, bell, ghz3.
 *
 * # Safety
 * `id` must be a NUL-terminated string; `out` must be writable.
 */
enum LqkdStatus lqkd_state_builtin(const char *id, struct LqkdState **out);

/**
 * State from the plain-text literal format (`dims` line plus terms).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum LqkdStatus lqkd_state_parse(const char *text, struct LqkdState **out);

/**
 * # Safety
 * `state` must be NULL or a handle from this library, not yet freed.
 */
void lqkd_state_free(struct LqkdState *state);

/**
 * Writes up to `cap` subsystem dimensions into `dims` and the subsystem
 * count into `count`. `dims` may be NULL when `cap` is 0.
 *
 * # Safety
 * `state` must be a live handle; `dims` must have room for `cap` values.
 */
enum LqkdStatus lqkd_state_dims(const struct LqkdState *state,
                                size_t *dims,
                                size_t cap,
                                size_t *count);

/**
 * Exact outcome distribution as JSON. `bases` is a comma-separated list,
 * one of comp, conj, fourier, mub4 per subsystem. `eve` may be NULL or an
 * intercept-resend spec whose targets are subsystem indices.
 *
 * # Safety
 * Pointers must be valid as documented; `out_json` must be writable.
 */
enum LqkdStatus lqkd_state_oracle_json(const struct LqkdState *state,
                                       const char *bases,
                                       const char *eve,
                                       char **out_json);

/**
 * Bipartition scan of the binary-mapped state as JSON.
 *
 * # Safety
 * `state` must be a live handle; `out_json` must be writable.
 */
enum LqkdStatus lqkd_state_factorize_json(const struct LqkdState *state,
                                          double tolerance,
                                          char **out_json);

/**
 * Session from a JSON settings object: the session fields (`protocol`,
 * `rounds`, `seed`, `eve`, ...) plus an optional `check` object. Missing
 * fields take their defaults.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` must be writable.
 */
enum LqkdStatus lqkd_session_new(const char *config_json, struct LqkdSession **out);

/**
 * # Safety
 * `session` must be NULL or a handle from this library, not yet freed.
 */
void lqkd_session_free(struct LqkdSession *session);

/**
 * Runs, sifts and checks the session. Output is identical for any
 * `workers >= 1`.
 *
 * # Safety
 * `session` must be a live handle; `out` must be writable.
 */
enum LqkdStatus lqkd_session_run(const struct LqkdSession *session,
                                 size_t workers,
                                 struct LqkdRun **out);

/**
 * # Safety
 * `run` must be NULL or a handle from this library, not yet freed.
 */
void lqkd_run_free(struct LqkdRun *run);

/**
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum LqkdStatus lqkd_run_decision(const struct LqkdRun *run, enum LqkdDecision *out);

/**
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum LqkdStatus lqkd_run_num_records(const struct LqkdRun *run, size_t *out);

/**
 * Round records, one JSON object per line.
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum LqkdStatus lqkd_run_records_jsonl(const struct LqkdRun *run, char **out);

/**
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum LqkdStatus lqkd_run_summary_json(const struct LqkdRun *run, char **out);

/**
 * Verification report for table 3, 4 or 5 as JSON; `consistent` receives
 * 1 when support and relations match the oracle, else 0.
 *
 * # Safety
 * `out_json` and `consistent` must be writable.
 */
enum LqkdStatus lqkd_verify_table(int table, char **out_json, int *consistent);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAYERED_QKD_H */
