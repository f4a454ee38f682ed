#ifndef NAMBU_H
#define NAMBU_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum NambuStatus {
  NAMBU_STATUS_OK = 0,
  NAMBU_STATUS_NULL_ARGUMENT = 1,
  NAMBU_STATUS_INVALID_UTF8 = 2,
  NAMBU_STATUS_PARSE_ERROR = 3,
  NAMBU_STATUS_SPEC_ERROR = 4,
  NAMBU_STATUS_STRUCTURE_ERROR = 5,
  NAMBU_STATUS_ARITY_ERROR = 6,
  NAMBU_STATUS_DOMAIN_ERROR = 7,
  NAMBU_STATUS_RESTRICTION_ERROR = 8,
  NAMBU_STATUS_PRECONDITION_FAILED = 9,
  NAMBU_STATUS_UNSUPPORTED = 10,
  NAMBU_STATUS_NUMERIC_FAILURE = 11,
  NAMBU_STATUS_CONFIG_ERROR = 12,
  NAMBU_STATUS_IO_ERROR = 13,
  NAMBU_STATUS_PANIC = 14,
} NambuStatus;

/**
 * An almost Nambu-Poisson structure.
 */
typedef struct NambuStructureHandle NambuStructureHandle;

/**
 * A projective or direct tower of structures.
 */
typedef struct NambuTowerHandle NambuTowerHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread; empty after success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *nambu_last_error(void);

const char *nambu_version(void);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void nambu_string_free(char *s);

/**
 * Parse a TOML spec holding a `[structure]` table.
 *
 * # Safety
 * `spec` must be a nul-terminated string; `out_handle` must be writable.
 */
enum NambuStatus nambu_structure_from_spec(const char *spec,
                                           struct NambuStructureHandle **out_handle);

/**
 * Instantiate a gallery item; `params` is null or `key=value` pairs
 * separated by `;`.
 *
 * # Safety
 * `name` and non-null `params` must be nul-terminated; `out_handle` must be writable.
 */
enum NambuStatus nambu_structure_from_gallery(const char *name,
                                              const char *params,
                                              struct NambuStructureHandle **out_handle);

/**
 * # Safety
 * `s` must be null or a handle from this library, freed at most once.
 */
void nambu_structure_free(struct NambuStructureHandle *s);

/**
 * Dimension `n` and order `r`.
 *
 * # Safety
 * `s` must be a live handle; `n` and `r` must be writable.
 */
enum NambuStatus nambu_structure_dims(const struct NambuStructureHandle *s, size_t *n, size_t *r);

/**
 * `{f₁, …, f_r}(x)` for `r` polynomial strings such as `"x1^2 + x2"`.
 *
 * # Safety
 * `fs` must point to `r` nul-terminated strings and `x` to `n` doubles.
 */
enum NambuStatus nambu_bracket_eval(const struct NambuStructureHandle *s,
                                    const char *const *fs,
                                    const double *x,
                                    size_t n,
                                    double *value);

/**
 * Rank of the anchor at `x`.
 *
 * # Safety
 * `x` must point to `n` doubles; `rank` must be writable.
 */
enum NambuStatus nambu_classify_point(const struct NambuStructureHandle *s,
                                      const double *x,
                                      size_t n,
                                      size_t *rank);

/**
 * Run a named check and return its reports as a JSON array.
 *
 * Names: `filippov_direct`, `leibniz`, `lie_derivative`,
 * `filippov_structural`, `census`, `algebroid`, or `all`.
 *
 * # Safety
 * `check` must be nul-terminated; `json` must be writable.
 */
enum NambuStatus nambu_check(const struct NambuStructureHandle *s,
                             const char *check,
                             uint64_t seed,
                             char **json);

/**
 * Parse a TOML spec holding a `[tower]` table.
 *
 * # Safety
 * `spec` must be nul-terminated; `out_handle` must be writable.
 */
enum NambuStatus nambu_tower_from_spec(const char *spec, struct NambuTowerHandle **out_handle);

/**
 * # Safety
 * `t` must be null or a handle from this library, freed at most once.
 */
void nambu_tower_free(struct NambuTowerHandle *t);

/**
 * Number of levels.
 *
 * # Safety
 * `t` must be a live handle; `levels` must be writable.
 */
enum NambuStatus nambu_tower_levels(const struct NambuTowerHandle *t, size_t *levels);

/**
 * Compatibility, stratification and (projective) limit-bracket and chart
 * checks as a JSON array of reports.
 *
 * # Safety
 * `t` must be a live handle; `json` must be writable.
 */
enum NambuStatus nambu_tower_check(const struct NambuTowerHandle *t,
                                   size_t samples,
                                   uint64_t seed,
                                   char **json);

/**
 * Run the command-line interface in process. `argv[0]` is the program
 * name. Output streams are returned as strings.
 *
 * # Safety
 * `argv` must point to `argc` nul-terminated strings; outputs must be writable.
 */
enum NambuStatus nambu_run(size_t argc,
                           const char *const *argv,
                           int32_t *exit_code,
                           char **stdout_text,
                           char **stderr_text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NAMBU_H */
