#ifndef TVALUES_H
#define TVALUES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TvStatus {
  TV_STATUS_OK = 0,
  TV_STATUS_INVALID_ARGUMENT = 1,
  TV_STATUS_PARSE = 2,
  TV_STATUS_DIVERGENT = 3,
  TV_STATUS_BUDGET_EXCEEDED = 4,
  TV_STATUS_UNRESOLVED = 5,
  TV_STATUS_IO = 6,
  TV_STATUS_NULL_POINTER = 7,
  TV_STATUS_PANIC = 8,
} TvStatus;

typedef enum TvVerdict {
  TV_VERDICT_LESS = -1,
  TV_VERDICT_UNRESOLVED = 0,
  TV_VERDICT_GREATER = 1,
} TvVerdict;

// Opaque memoizing comparison context.
typedef struct TvCertifier TvCertifier;

// Opaque enclosure `[lo, hi]`.
typedef struct TvEnclosure TvEnclosure;

// Opaque multi-index.
typedef struct TvIndex TvIndex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or NULL. Owned by the library.
const char *tv_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must come from this library and not have been freed.
void tv_string_free(char *s);

// Parses `"2,1,3"` or `"empty"`.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum TvStatus tv_index_parse(const char *text, struct TvIndex **out);

// Builds an index from `len` exponents; `len = 0` gives the empty index.
//
// # Safety
// `exponents` must point to `len` values (may be NULL when `len = 0`).
enum TvStatus tv_index_new(const uint32_t *exponents, size_t len, struct TvIndex **out);

// # Safety
// `index` must come from this library and not have been freed.
void tv_index_free(struct TvIndex *index);

// # Safety
// `index` must be a live handle.
size_t tv_index_depth(const struct TvIndex *index);

// # Safety
// `index` must be a live handle.
uint32_t tv_index_weight(const struct TvIndex *index);

// Canonical text of the index; release with [`tv_string_free`].
//
// # Safety
// `index` must be a live handle; `out` must be writable.
enum TvStatus tv_index_to_string(const struct TvIndex *index, char **out);

// Encloses `t(k)_tail` to width at most `width`; `max_bits = 0` keeps the
// default ceiling. On `BUDGET_EXCEEDED` the best partial enclosure is still
// stored in `out`.
//
// # Safety
// `index` must be a live handle; `out` must be writable.
enum TvStatus tv_eval(const struct TvIndex *index,
                      uint64_t tail,
                      double width,
                      uint32_t max_bits,
                      struct TvEnclosure **out);

// # Safety
// `e` must come from this library and not have been freed.
void tv_enclosure_free(struct TvEnclosure *e);

// Endpoints as doubles, rounded outward.
//
// # Safety
// `e` must be a live handle; `lo` and `hi` must be writable.
enum TvStatus tv_enclosure_bounds(const struct TvEnclosure *e, double *lo, double *hi);

// Endpoints as decimal strings with `digits` fractional digits, rounded
// outward; release both with [`tv_string_free`].
//
// # Safety
// `e` must be a live handle; `lo` and `hi` must be writable.
enum TvStatus tv_enclosure_decimal(const struct TvEnclosure *e,
                                   size_t digits,
                                   char **lo,
                                   char **hi);

// A fresh comparison context; `max_bits = 0` keeps the default ceiling.
//
// # Safety
// `out` must be writable.
enum TvStatus tv_certifier_new(uint32_t max_bits, struct TvCertifier **out);

// # Safety
// `c` must come from this library and not have been freed.
void tv_certifier_free(struct TvCertifier *c);

// Certified order of `t(a)_ta` and `t(b)_tb`. An unresolved comparison is
// reported through `verdict`, not as an error.
//
// # Safety
// All handles must be live; `verdict` must be writable; `separation` may be NULL.
enum TvStatus tv_compare(const struct TvCertifier *c,
                         const struct TvIndex *a,
                         uint64_t ta,
                         const struct TvIndex *b,
                         uint64_t tb,
                         enum TvVerdict *verdict,
                         double *separation);

// Band and position of `t(k)`.
//
// # Safety
// Handles must be live; `band` and `position` must be writable.
enum TvStatus tv_phi(const struct TvCertifier *c,
                     const struct TvIndex *index,
                     size_t *band,
                     size_t *position);

// The index generating `β_rank` (1-based) and, optionally, its value.
//
// # Safety
// `c` must be live; `source` must be writable; `value` may be NULL.
enum TvStatus tv_beta(const struct TvCertifier *c,
                      size_t rank,
                      struct TvIndex **source,
                      struct TvEnclosure **value);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TVALUES_H */
