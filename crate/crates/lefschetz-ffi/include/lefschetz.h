/* Generated by cbindgen from lefschetz-ffi; do not edit. */

#ifndef LEFSCHETZ_H
#define LEFSCHETZ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LfStatus {
  LF_STATUS_OK = 0,
  LF_STATUS_NULL_POINTER = 1,
  LF_STATUS_INVALID_UTF8 = 2,
  LF_STATUS_PARSE = 3,
  LF_STATUS_UNKNOWN_ENTRY = 4,
  LF_STATUS_COMPUTE = 5,
  LF_STATUS_BUFFER_TOO_SMALL = 6,
  LF_STATUS_PANIC = 7,
} LfStatus;

/**
 * Opaque factorization handle.
 */
typedef struct LfFactorization LfFactorization;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *lf_last_error(void);

/**
 * Parses factorization-file text.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a writable pointer.
 */
enum LfStatus lf_parse(const char *src, struct LfFactorization **out);

/**
 * Looks up a catalog entry such as `W`, `W1(2,3)` or `K2`.
 *
 * # Safety
 * `id` must be a NUL-terminated string and `out` a writable pointer.
 */
enum LfStatus lf_catalog_entry(const char *id, struct LfFactorization **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `h` must come from this library and not have been freed.
 */
void lf_free(struct LfFactorization *h);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void lf_string_free(char *s);

/**
 * Number of twists.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum LfStatus lf_length(const struct LfFactorization *h, size_t *out);

/**
 * Whether the symplectic product equals the target.
 *
 * # Safety
 * `h` must be a live handle and `pass` writable.
 */
enum LfStatus lf_verify(const struct LfFactorization *h, bool *pass);

/**
 * Signature through the Meyer cocycle.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum LfStatus lf_signature(const struct LfFactorization *h, int64_t *out);

/**
 * First homology as `ℤ^rank ⊕ ℤ/t_1 ⊕ … ⊕ ℤ/t_k`.
 *
 * `torsion` may be null when `capacity` is 0. `count` always receives `k`;
 * when `k > capacity` nothing is written to `torsion` and the call returns
 * `BufferTooSmall`.
 *
 * # Safety
 * `h` must be a live handle, `rank` and `count` writable and `torsion`
 * valid for `capacity` elements.
 */
enum LfStatus lf_h1(const struct LfFactorization *h,
                    size_t *rank,
                    int64_t *torsion,
                    size_t capacity,
                    size_t *count);

/**
 * Full invariant report as JSON; free with `lf_string_free`.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum LfStatus lf_invariants_json(const struct LfFactorization *h, char **out);

/**
 * Factorization-file text; free with `lf_string_free`.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum LfStatus lf_serialize(const struct LfFactorization *h, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEFSCHETZ_H */
