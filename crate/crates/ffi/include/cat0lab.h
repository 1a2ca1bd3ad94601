#ifndef CAT0LAB_H
#define CAT0LAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Cat0Status {
  CAT0_STATUS_OK = 0,
  CAT0_STATUS_NULL_POINTER = 1,
  CAT0_STATUS_INVALID_UTF8 = 2,
  CAT0_STATUS_SCHEMA = 3,
  CAT0_STATUS_DOMAIN = 4,
  CAT0_STATUS_RADIUS_EXCEEDED = 5,
  CAT0_STATUS_RESOURCE = 6,
  CAT0_STATUS_CONVERGENCE = 7,
  CAT0_STATUS_UNSUPPORTED = 8,
  CAT0_STATUS_IO = 9,
  CAT0_STATUS_JSON = 10,
  CAT0_STATUS_BUFFER_TOO_SMALL = 11,
  CAT0_STATUS_UNKNOWN_COMMAND = 12,
  CAT0_STATUS_PANIC = 13,
} Cat0Status;

/**
 * A parsed experiment config.
 */
typedef struct Cat0Config Cat0Config;

/**
 * The record and CSV series of one run.
 */
typedef struct Cat0Record Cat0Record;

/**
 * A CAT(0) space built from its JSON descriptor.
 */
typedef struct Cat0Space Cat0Space;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf`.
 *
 * Returns the size needed including the NUL, or 0 when there is no error.
 * Nothing is written unless the message fits.
 *
 * # Safety
 * `buf` is null or valid for `cap` bytes.
 */
size_t cat0_last_error(char *buf, size_t cap);

void cat0_clear_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cat0_version(void);

/**
 * Parses and schema-checks an experiment config.
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is writable.
 */
enum Cat0Status cat0_config_parse(const char *json, struct Cat0Config **out);

/**
 * # Safety
 * `config` is null or was returned by [`cat0_config_parse`] and not yet freed.
 */
void cat0_config_free(struct Cat0Config *config);

/**
 * Runs a command (`"drift"`, `"conv-comb"`, `"fixed-point"`, `"shalom"`,
 * `"grigorchuk-audit"`, `"space-check"`). Output directories in the config
 * are ignored; use [`cat0_record_json`] and [`cat0_record_csv`].
 *
 * # Safety
 * `command` is a NUL-terminated string, `config` a live handle, `out` writable.
 */
enum Cat0Status cat0_run(const char *command,
                         const struct Cat0Config *config,
                         struct Cat0Record **out);

/**
 * Process exit code for the run: 0 pass or complete, 2 violation; -1 for null.
 *
 * # Safety
 * `record` is null or a live handle.
 */
int32_t cat0_record_exit_code(const struct Cat0Record *record);

/**
 * The run record as JSON.
 *
 * # Safety
 * `record` is a live handle; `buf` is null or valid for `cap` bytes; `needed` is null or writable.
 */
enum Cat0Status cat0_record_json(const struct Cat0Record *record,
                                 char *buf,
                                 size_t cap,
                                 size_t *needed);

/**
 * Number of CSV series attached to the record.
 *
 * # Safety
 * `record` is null or a live handle.
 */
size_t cat0_record_csv_count(const struct Cat0Record *record);

/**
 * CSV series `index` as `name\ncontents`.
 *
 * # Safety
 * As for [`cat0_record_json`].
 */
enum Cat0Status cat0_record_csv(const struct Cat0Record *record,
                                size_t index,
                                char *buf,
                                size_t cap,
                                size_t *needed);

/**
 * # Safety
 * `record` is null or was returned by [`cat0_run`] and not yet freed.
 */
void cat0_record_free(struct Cat0Record *record);

/**
 * Builds a space from its JSON descriptor.
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is writable.
 */
enum Cat0Status cat0_space_parse(const char *json, struct Cat0Space **out);

/**
 * Distance between two points given in the space's JSON point form.
 *
 * # Safety
 * `space` is a live handle, `x` and `y` NUL-terminated strings, `out` writable.
 */
enum Cat0Status cat0_space_distance(const struct Cat0Space *space,
                                    const char *x,
                                    const char *y,
                                    double *out);

/**
 * Point at time `t ∈ [0, 1]` on the geodesic from `x` to `y`, as JSON.
 *
 * # Safety
 * As for [`cat0_space_distance`]; `buf` is null or valid for `cap` bytes, `needed` null or writable.
 */
enum Cat0Status cat0_space_geodesic(const struct Cat0Space *space,
                                    const char *x,
                                    const char *y,
                                    double t,
                                    char *buf,
                                    size_t cap,
                                    size_t *needed);

/**
 * # Safety
 * `space` is null or was returned by [`cat0_space_parse`] and not yet freed.
 */
void cat0_space_free(struct Cat0Space *space);

/**
 * Exact `L^n` for `n = 1..=len` under the uniform measure on the standard
 * symmetric generators of the group described by `group_json`.
 *
 * # Safety
 * `group_json` is a NUL-terminated string; `out` is valid for `len` doubles.
 */
enum Cat0Status cat0_drift_exact(const char *group_json, double *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAT0LAB_H */
