#ifndef QAICCC_H
#define QAICCC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QaicccOwnerKind {
  QAICCC_OWNER_KIND_TRUSTED = 0,
  QAICCC_OWNER_KIND_UNTRUSTED = 1,
  /**
   * Filler user holding leftover qubits.
   */
  QAICCC_OWNER_KIND_IDLE = 2,
} QaicccOwnerKind;

/**
 * Result of every fallible call. The first five values match the
 * command-line exit codes.
 */
typedef enum QaicccStatus {
  QAICCC_STATUS_OK = 0,
  /**
   * Malformed or inconsistent input.
   */
  QAICCC_STATUS_INPUT = 1,
  QAICCC_STATUS_INSUFFICIENT_QUBITS = 2,
  QAICCC_STATUS_NO_FEASIBLE_ALLOCATION = 3,
  /**
   * Exhaustive oracle refused: too many qubits for the cap.
   */
  QAICCC_STATUS_INSTANCE_TOO_LARGE = 4,
  QAICCC_STATUS_NULL_POINTER = 16,
  QAICCC_STATUS_INVALID_UTF8 = 17,
  /**
   * Argument out of range (qubit index, zero limits).
   */
  QAICCC_STATUS_INVALID_ARGUMENT = 18,
  /**
   * A Rust panic was caught at the boundary.
   */
  QAICCC_STATUS_PANIC = 19,
} QaicccStatus;

/**
 * Parsed platform, requests and rates plus search limits.
 */
typedef struct QaicccInstance QaicccInstance;

/**
 * Outcome of an allocation run.
 */
typedef struct QaicccResult QaicccResult;

/**
 * Owner of a qubit in the selected allocation. `index` is the position of
 * the request in its trust class, 0 for idle.
 */
typedef struct QaicccOwner {
  enum QaicccOwnerKind kind;
  uint32_t index;
} QaicccOwner;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread; do not free.
 */
const char *qaiccc_last_error(void);

/**
 * Library version as a static string.
 */
const char *qaiccc_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void qaiccc_string_free(char *s);

/**
 * Parses an instance from the three JSON documents. On success `*out`
 * holds a handle to release with [`qaiccc_instance_free`].
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be null or
 * writable.
 */
enum QaicccStatus qaiccc_instance_new(const char *platform_json,
                                      const char *requests_json,
                                      const char *rates_json,
                                      struct QaicccInstance **out);

/**
 * Releases an instance. Null is ignored.
 *
 * # Safety
 * `inst` must come from [`qaiccc_instance_new`] and not be used afterwards.
 */
void qaiccc_instance_free(struct QaicccInstance *inst);

/**
 * Caps the search population; 0 removes the cap.
 *
 * # Safety
 * `inst` must be null or a live instance.
 */
enum QaicccStatus qaiccc_instance_set_max_population(struct QaicccInstance *inst, size_t limit);

/**
 * Caps connector paths explored per connection step. Must be positive.
 *
 * # Safety
 * `inst` must be null or a live instance.
 */
enum QaicccStatus qaiccc_instance_set_max_paths(struct QaicccInstance *inst, size_t limit);

/**
 * Number of qubits on the platform.
 *
 * # Safety
 * `inst` must be null or a live instance.
 */
enum QaicccStatus qaiccc_instance_qubit_count(const struct QaicccInstance *inst, size_t *out);

/**
 * Runs the search and selection. `snapshots` keeps per-rate population
 * snapshots in the JSON report. Release the result with
 * [`qaiccc_result_free`].
 *
 * # Safety
 * `inst` must be null or a live instance; `out` must be null or writable.
 */
enum QaicccStatus qaiccc_allocate(const struct QaicccInstance *inst,
                                  bool snapshots,
                                  struct QaicccResult **out);

/**
 * Releases a result. Null is ignored.
 *
 * # Safety
 * `res` must come from [`qaiccc_allocate`] and not be used afterwards.
 */
void qaiccc_result_free(struct QaicccResult *res);

/**
 * Score and penalty of the selected allocation.
 *
 * # Safety
 * `res` must be null or a live result; outputs must be null or writable.
 */
enum QaicccStatus qaiccc_result_scores(const struct QaicccResult *res,
                                       double *score,
                                       double *penalty);

/**
 * Who controls `qubit` in the selected allocation.
 *
 * # Safety
 * `res` must be null or a live result; `out` must be null or writable.
 */
enum QaicccStatus qaiccc_result_owner(const struct QaicccResult *res,
                                      uint32_t qubit,
                                      struct QaicccOwner *out);

/**
 * Canonical form of the selected allocation, e.g. `{U:{q0,q1}, U:{q2,q3,q4}}`.
 *
 * # Safety
 * `res` must be null or a live result; `out` must be null or writable.
 */
enum QaicccStatus qaiccc_result_key(const struct QaicccResult *res, char **out);

/**
 * Full run report. `text` selects the human-readable layout instead of JSON.
 *
 * # Safety
 * `res` must be null or a live result; `out` must be null or writable.
 */
enum QaicccStatus qaiccc_result_report(const struct QaicccResult *res, bool text, char **out);

/**
 * Exhaustive comparison against every complete allocation, as a JSON
 * document. Refuses instances with more than `cap` qubits.
 *
 * # Safety
 * `inst` must be null or a live instance; `out` must be null or writable.
 */
enum QaicccStatus qaiccc_oracle_json(const struct QaicccInstance *inst, size_t cap, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QAICCC_H */
