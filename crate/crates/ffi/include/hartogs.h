#ifndef HARTOGS_H
#define HARTOGS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. Zero is success.
typedef enum HgStatus {
  HG_STATUS_OK = 0,
  // A required pointer argument was null.
  HG_STATUS_NULL_POINTER = 1,
  // Invalid input: parameters, parse errors, inadmissible indices.
  HG_STATUS_VALIDATION = 2,
  // Numerical failure: singular kernel, truncation, non-finite values.
  HG_STATUS_NUMERICAL = 3,
  // A value does not fit the C type (for example a rational in `int64_t`).
  HG_STATUS_OVERFLOW = 4,
  // Internal panic caught at the boundary.
  HG_STATUS_PANIC = 5,
} HgStatus;

// Opaque domain handle.
typedef struct HgDomain HgDomain;

// Opaque closed-form kernel handle (rational exponents only).
typedef struct HgKernel HgKernel;

// An exact rational `num / den` with `den > 0`.
typedef struct HgRational {
  int64_t num;
  int64_t den;
} HgRational;

// A complex number.
typedef struct HgComplex {
  double re;
  double im;
} HgComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hg_version(void);

// Message of the last failure on this thread, or null. Valid until the next
// failing call on the same thread.
const char *hg_last_error(void);

// Domain with `gamma = m / l` (reduced internally) and `z` in `C^n`.
//
// # Safety
// `out` must be a valid pointer.
enum HgStatus hg_domain_new(int64_t m, int64_t l, uint32_t n, struct HgDomain **out);

// Domain with `gamma` given as a token (`sqrt2`, `pi`, `e`, `golden`,
// `sqrt(k)`), fraction or decimal, carried to `digits` decimal digits.
//
// # Safety
// `gamma` must be a NUL-terminated string and `out` a valid pointer.
enum HgStatus hg_domain_new_gamma(const char *gamma,
                                  uint32_t n,
                                  uint32_t digits,
                                  struct HgDomain **out);

// Releases a domain. Null is ignored.
//
// # Safety
// `domain` must come from `hg_domain_new*` and not be used afterwards.
void hg_domain_free(struct HgDomain *domain);

// Euclidean volume of the domain.
//
// # Safety
// Pointers must be valid.
enum HgStatus hg_domain_volume(const struct HgDomain *domain, double *out);

// Squared `L^2` norm of `z^alpha w^beta`; `alpha` has `n` entries. Writes
// `+inf` when the monomial is not square integrable.
//
// # Safety
// `alpha` must point to `alpha_len` values; other pointers must be valid.
enum HgStatus hg_monomial_norm_sq(const struct HgDomain *domain,
                                  const uint64_t *alpha,
                                  size_t alpha_len,
                                  int64_t beta,
                                  double *out);

// Sharp open interval of `p` for which the projection is `L^p` bounded.
//
// # Safety
// Pointers must be valid.
enum HgStatus hg_sharp_range(const struct HgDomain *domain,
                             struct HgRational *lo,
                             struct HgRational *hi);

// Critical residue `j0`, image exponents `(eta1, eta2)` of `P f` for the
// bounded counterexample `f`, and the exact threshold `p`.
//
// # Safety
// Pointers must be valid.
enum HgStatus hg_counterexample(const struct HgDomain *domain,
                                uint64_t *j0,
                                uint64_t *eta1,
                                int64_t *eta2,
                                struct HgRational *threshold);

// JSON report of the sharp range and Schur window, as printed by
// `hartogs range`. Free the result with [`hg_string_free`].
//
// # Safety
// Pointers must be valid.
enum HgStatus hg_range_report_json(const struct HgDomain *domain, char **out);

// JSON counterexample report with its truncated-integral certificate, as
// printed by `hartogs counterexample`. Free with [`hg_string_free`].
//
// # Safety
// Pointers must be valid.
enum HgStatus hg_counterexample_report_json(const struct HgDomain *domain,
                                            uint32_t cutoffs,
                                            char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void hg_string_free(char *s);

// Closed-form kernel for a domain with rational exponent.
//
// # Safety
// Pointers must be valid.
enum HgStatus hg_kernel_new(const struct HgDomain *domain, struct HgKernel **out);

// Releases a kernel. Null is ignored.
//
// # Safety
// `kernel` must come from `hg_kernel_new` and not be used afterwards.
void hg_kernel_free(struct HgKernel *kernel);

// Kernel as a function of `a = z . conj(s)` and `b = w conj(t)`.
//
// # Safety
// Pointers must be valid.
enum HgStatus hg_kernel_closed(const struct HgKernel *kernel,
                               struct HgComplex a,
                               struct HgComplex b,
                               struct HgComplex *out);

// Kernel at the points `x = (xz, xw)` and `y = (yz, yw)`; `xz` and `yz`
// hold `n` entries each.
//
// # Safety
// `xz` and `yz` must point to `n` values; other pointers must be valid.
enum HgStatus hg_kernel_eval(const struct HgKernel *kernel,
                             const struct HgComplex *xz,
                             struct HgComplex xw,
                             const struct HgComplex *yz,
                             struct HgComplex yw,
                             struct HgComplex *out);

// Upper bound `|b|^e / (|1 - b|^2 |b^l - a^m|^(n+1))` for the kernel.
//
// # Safety
// Pointers must be valid.
enum HgStatus hg_kernel_bound(const struct HgKernel *kernel,
                              struct HgComplex a,
                              struct HgComplex b,
                              double *out);

// Kernel by its monomial series to relative tolerance `rel_tol`; works for
// irrational exponents. `terms` (optional) receives the number of terms.
//
// # Safety
// `domain` and `out` must be valid; `terms` may be null.
enum HgStatus hg_kernel_series(const struct HgDomain *domain,
                               struct HgComplex a,
                               struct HgComplex b,
                               double rel_tol,
                               struct HgComplex *out,
                               size_t *terms);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HARTOGS_H */
