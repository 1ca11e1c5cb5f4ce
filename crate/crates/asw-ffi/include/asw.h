#ifndef ASW_H
#define ASW_H

/* Generated by cbindgen from asw-ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum AswStatus {
  ASW_STATUS_OK = 0,
  ASW_STATUS_NULL_POINTER = 1,
  ASW_STATUS_INVALID_UTF8 = 2,
  ASW_STATUS_PARSE = 3,
  ASW_STATUS_IO = 4,
  /**
   * Failed certification or another mathematical inconsistency.
   */
  ASW_STATUS_INCONSISTENT = 5,
  ASW_STATUS_UNSUPPORTED = 6,
  ASW_STATUS_INTERNAL = 7,
} AswStatus;

/**
 * A curve with its `H^1(X, O_X)` basis and Hasse-Witt matrix.
 */
typedef struct AswCurve AswCurve;

/**
 * A basis of `H^1_et(X, Z/p^n)`.
 */
typedef struct AswH1 AswH1;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *asw_version(void);

/**
 * Message of the last failure on this thread, or NULL. Free with [`asw_string_free`].
 */
char *asw_last_error(void);

/**
 * Parse a curve description (the JSON accepted by the `asw` tool).
 *
 * `hasse_witt` may be NULL to use the matrix embedded in the JSON; otherwise it is
 * an inline matrix `"a,b;c,d"` or a JSON array. On success `*out` owns a new
 * handle to be released with [`asw_curve_free`].
 *
 * # Safety
 * `curve_json` must be a valid NUL-terminated string; `hasse_witt` must be NULL or
 * a valid NUL-terminated string; `out` must be a valid pointer to writable storage.
 */
enum AswStatus asw_curve_load(const char *curve_json,
                              const char *hasse_witt,
                              uint64_t seed,
                              struct AswCurve **out);

/**
 * Genus of the curve, 0 for NULL.
 *
 * # Safety
 * `curve` must be NULL or a live handle from [`asw_curve_load`].
 */
uintptr_t asw_curve_genus(const struct AswCurve *curve);

/**
 * Release a curve handle. NULL is ignored.
 *
 * # Safety
 * `curve` must be NULL or a handle from [`asw_curve_load`] not freed before.
 */
void asw_curve_free(struct AswCurve *curve);

/**
 * Compute and certify a basis of `H^1_et(X, Z/p^n)`.
 *
 * On success `*out` owns a new handle to be released with [`asw_h1_free`].
 *
 * # Safety
 * `curve` must be a live handle from [`asw_curve_load`]; `out` must be a valid
 * pointer to writable storage.
 */
enum AswStatus asw_h1_compute(const struct AswCurve *curve, uint32_t n, struct AswH1 **out);

/**
 * Rank `s` of the basis, 0 for NULL.
 *
 * # Safety
 * `h1` must be NULL or a live handle from [`asw_h1_compute`].
 */
uintptr_t asw_h1_rank(const struct AswH1 *h1);

/**
 * Witt level `n` of the basis, 0 for NULL.
 *
 * # Safety
 * `h1` must be NULL or a live handle from [`asw_h1_compute`].
 */
uintptr_t asw_h1_level(const struct AswH1 *h1);

/**
 * The basis report as JSON; with `with_tower` the tower equations are included.
 * `*out` receives a string to be released with [`asw_string_free`].
 *
 * # Safety
 * `h1` must be a live handle from [`asw_h1_compute`]; `out` must be a valid
 * pointer to writable storage.
 */
enum AswStatus asw_h1_to_json(const struct AswH1 *h1, bool with_tower, char **out);

/**
 * Release a basis handle. NULL is ignored.
 *
 * # Safety
 * `h1` must be NULL or a handle from [`asw_h1_compute`] not freed before.
 */
void asw_h1_free(struct AswH1 *h1);

/**
 * Cohomology of the constant sheaf `Z/p^n` on the curve, as the JSON report
 * written by `asw sheaf`. `*out` receives a string to be released with
 * [`asw_string_free`].
 *
 * # Safety
 * `curve` must be a live handle from [`asw_curve_load`]; `out` must be a valid
 * pointer to writable storage.
 */
enum AswStatus asw_trivial_sheaf_cohomology(const struct AswCurve *curve, uint32_t n, char **out);

/**
 * Release a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a pointer returned by this library and not freed before.
 */
void asw_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASW_H */
