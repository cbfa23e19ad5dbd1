#ifndef ORGANON_H
#define ORGANON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum OrganonStatus {
  ORGANON_STATUS_OK = 0,
  ORGANON_STATUS_NULL_ARGUMENT = 1,
  ORGANON_STATUS_INVALID_UTF8 = 2,
  ORGANON_STATUS_PARSE_ERROR = 3,
  ORGANON_STATUS_EVAL_ERROR = 4,
  ORGANON_STATUS_DISAGREEMENT = 5,
  ORGANON_STATUS_PANIC = 6,
} OrganonStatus;

/**
 * Opaque handle to a loaded script.
 */
typedef struct OrganonSession OrganonSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into the library on this thread.
 */
const char *organon_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *organon_version(void);

/**
 * Parses and elaborates `script`. `bounds` is `"L,S,C"` or NULL for the
 * defaults. On success `*out` receives a new session.
 *
 * # Safety
 * `script` must be a valid NUL-terminated string, `bounds` NULL or one, and
 * `out` a valid pointer to writable storage.
 */
enum OrganonStatus organon_session_new(const char *script,
                                       const char *bounds,
                                       struct OrganonSession **out);

/**
 * Releases a session. NULL is ignored.
 *
 * # Safety
 * `session` must be NULL or a handle from [`organon_session_new`] that has
 * not been freed.
 */
void organon_session_free(struct OrganonSession *session);

/**
 * Runs every query of the session and writes the JSON report to `*out`.
 * With `compare` set each query is also checked against the oracles and an
 * unexplained disagreement yields `Disagreement` (the report is still
 * written).
 *
 * # Safety
 * `session` must be a live handle and `out` a valid pointer.
 */
enum OrganonStatus organon_session_run_json(const struct OrganonSession *session,
                                            bool compare,
                                            char **out);

/**
 * Adds declarations to the session and writes the reports of the queries
 * among them to `*out` as a JSON array.
 *
 * # Safety
 * `session` must be a live handle, `input` a valid NUL-terminated string and
 * `out` a valid pointer.
 */
enum OrganonStatus organon_session_extend(struct OrganonSession *session,
                                          const char *input,
                                          char **out);

/**
 * Abstracts `vars` (comma-separated, outermost first) from `expr` and writes
 * the S/K term to `*out`. Other names resolve against `script`, which may
 * be NULL.
 *
 * # Safety
 * `expr` and `vars` must be valid NUL-terminated strings, `script` NULL or
 * one, and `out` a valid pointer.
 */
enum OrganonStatus organon_abstract(const char *expr,
                                    const char *vars,
                                    const char *script,
                                    char **out);

/**
 * Frees a string returned by the library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library that has not been freed.
 */
void organon_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORGANON_H */
