#ifndef TRACE_FORMS_H
#define TRACE_FORMS_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define TF_OK 0

#define TF_ERR_NULL 1

#define TF_ERR_VALIDATION 2

#define TF_ERR_PRECONDITION 3

#define TF_ERR_COST_CAP 4

#define TF_ERR_PANIC 5

/**
 * Prime field context.
 */
typedef struct TfField TfField;

/**
 * Complex-valued table indexed by `0..p`.
 */
typedef struct TfTraceTable TfTraceTable;

/**
 * Status code returned by fallible functions.
 */
typedef int32_t TfStatus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call.
 */
const char *tf_last_error(void);

/**
 * Static description of a status code.
 */
const char *tf_status_name(TfStatus code);

/**
 * Builds the context for `F_p`. On success `*out` owns a new handle.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
TfStatus tf_field_new(uint64_t p, struct TfField **out);

/**
 * # Safety
 * `f` must be null or a handle from [`tf_field_new`] not yet freed.
 */
void tf_field_free(struct TfField *f);

/**
 * The prime, or 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
uint32_t tf_field_prime(const struct TfField *f);

/**
 * The smallest primitive root, or 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
uint32_t tf_field_generator(const struct TfField *f);

/**
 * Normalized `Kl_k(a; p)` for a single `a`, by direct enumeration.
 *
 * # Safety
 * `f` must be a live handle; `re` and `im` must be valid for writes.
 */
TfStatus tf_kl_direct(const struct TfField *f, uint32_t a, uint32_t k, double *re, double *im);

/**
 * Full table `a -> Kl_k(a; p)`.
 *
 * # Safety
 * `f` must be a live handle; `out` must be valid for writes.
 */
TfStatus tf_kl_bulk(const struct TfField *f, uint32_t k, struct TfTraceTable **out);

/**
 * # Safety
 * `t` must be null or a handle not yet freed.
 */
void tf_trace_table_free(struct TfTraceTable *t);

/**
 * Number of entries (equal to `p`), or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t tf_trace_table_len(const struct TfTraceTable *t);

/**
 * Copies up to `cap` entries as interleaved `re, im` pairs into `buf` (length `2 * cap`).
 *
 * # Safety
 * `t` must be a live handle; `buf` must hold `2 * cap` doubles.
 */
TfStatus tf_trace_table_values(const struct TfTraceTable *t, double *buf, size_t cap);

/**
 * `sin((k+1)θ) / sin θ`.
 */
double tf_sym_eval(uint32_t k, double theta);

/**
 * Sato–Tate distribution function on `[-2, 2]`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
TfStatus tf_st_cdf(double x, double *out);

/**
 * Kolmogorov–Smirnov distance of the samples to the Sato–Tate law.
 *
 * # Safety
 * `xs` must hold `n` doubles; `out` must be valid for writes.
 */
TfStatus tf_discrepancy(const double *xs, size_t n, double *out);

/**
 * Multiplicative energy of `A` and `B` inside `F_p`, split into 64-bit halves.
 *
 * # Safety
 * `a` and `b` must hold `na` and `nb` values; `lo` and `hi` must be valid for writes.
 */
TfStatus tf_mult_energy(uint32_t p,
                        const uint32_t *a,
                        size_t na,
                        const uint32_t *b,
                        size_t nb,
                        uint64_t *lo,
                        uint64_t *hi);

/**
 * The quadruple-ratio count `D(A)` over the field of `f`, split into 64-bit halves.
 *
 * # Safety
 * `f` must be a live handle; `a` must hold `na` values; `lo` and `hi` must be valid for writes.
 */
TfStatus tf_quad_d(const struct TfField *f,
                   const uint32_t *a,
                   size_t na,
                   uint64_t *lo,
                   uint64_t *hi);

/**
 * `Σ_{m,n} α_m β_n K(mn)` with weights given as separate real and imaginary arrays.
 *
 * # Safety
 * `t` must be a live handle. `m`, `alpha_re`, `alpha_im` hold `nm` entries,
 * `n`, `beta_re`, `beta_im` hold `nn` entries; `re` and `im` must be valid for writes.
 */
TfStatus tf_bilinear_form(const struct TfTraceTable *t,
                          const uint32_t *m,
                          const double *alpha_re,
                          const double *alpha_im,
                          size_t nm,
                          const uint32_t *n,
                          const double *beta_re,
                          const double *beta_im,
                          size_t nn,
                          double *re,
                          double *im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRACE_FORMS_H */
