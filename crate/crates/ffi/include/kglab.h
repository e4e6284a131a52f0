#ifndef KGLAB_H
#define KGLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum KglabStatus {
  KGLAB_STATUS_OK = 0,
  KGLAB_STATUS_NULL_POINTER = 1,
  KGLAB_STATUS_INVALID_GRID = 2,
  KGLAB_STATUS_NON_FINITE = 3,
  KGLAB_STATUS_GRID_MISMATCH = 4,
  KGLAB_STATUS_UNDER_RESOLVED = 5,
  KGLAB_STATUS_PRECONDITION = 6,
  KGLAB_STATUS_INFRARED_SINGULAR = 7,
  KGLAB_STATUS_TIME_BEYOND_MARGIN = 8,
  KGLAB_STATUS_UNSTABLE = 9,
  KGLAB_STATUS_NON_MULTIPLE_TIME = 10,
  KGLAB_STATUS_WEIGHT_OVERFLOW = 11,
  KGLAB_STATUS_NOT_CONVERGED = 12,
  KGLAB_STATUS_FIT_REJECTED = 13,
  KGLAB_STATUS_ZERO_NORM = 14,
  KGLAB_STATUS_CONFIG = 15,
  KGLAB_STATUS_IO = 16,
  KGLAB_STATUS_FORMAT = 17,
  KGLAB_STATUS_BUFFER_TOO_SMALL = 18,
  KGLAB_STATUS_PANIC = 19,
} KglabStatus;

// Opaque sampled complex field on a periodic grid.
typedef struct KglabField KglabField;

// Opaque commutator-function slice `Delta(t, .)`.
typedef struct KglabPropagator KglabPropagator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL after a success.
// Valid until the next kglab call on the same thread.
const char *kglab_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *kglab_version(void);

// Builds a field from `n` samples with spacing `dx`. `im` may be NULL for a
// real field.
//
// # Safety
// `re` must point to `n` doubles, as must `im` unless it is NULL.
enum KglabStatus kglab_field_new(size_t n,
                                 double dx,
                                 const double *re,
                                 const double *im,
                                 struct KglabField **out);

// Samples `amplitude * exp(1 - 1/(1 - u^2))`, `u = (x - center)/radius`.
//
// # Safety
// `out` must be valid for writes.
enum KglabStatus kglab_field_bump(size_t n,
                                  double dx,
                                  double center,
                                  double radius,
                                  double amplitude,
                                  struct KglabField **out);

// Releases a field. NULL is ignored.
//
// # Safety
// `field` must come from this library and not be used afterwards.
void kglab_field_free(struct KglabField *field);

// Number of grid points, or 0 for NULL.
//
// # Safety
// `field` must be NULL or a live handle.
size_t kglab_field_len(const struct KglabField *field);

// Grid spacing, or NaN for NULL.
//
// # Safety
// `field` must be NULL or a live handle.
double kglab_field_dx(const struct KglabField *field);

// Copies the samples into caller buffers of length `len`. Either buffer may
// be NULL to skip that component.
//
// # Safety
// Non-NULL buffers must hold `len` doubles.
enum KglabStatus kglab_field_values(const struct KglabField *field,
                                    double *re,
                                    double *im,
                                    size_t len);

// Exact spectral evolution of `(phi, pi)` from time 0 to `t`. `pi` NULL
// means data at rest; `out_pi` NULL skips the time derivative.
//
// # Safety
// Handles must be live; outputs must be valid for writes.
enum KglabStatus kglab_evolve_spectral(const struct KglabField *phi,
                                       const struct KglabField *pi,
                                       double m,
                                       double t,
                                       struct KglabField **out_phi,
                                       struct KglabField **out_pi);

// Staggered three-point-stencil evolution with step `dt`; `t` must be a
// multiple of `dt`.
//
// # Safety
// As [`kglab_evolve_spectral`].
enum KglabStatus kglab_evolve_local_fd(const struct KglabField *phi,
                                       const struct KglabField *pi,
                                       double m,
                                       double t,
                                       double dt,
                                       struct KglabField **out_phi,
                                       struct KglabField **out_pi);

// Energy of `(phi, pi)`; `pi` NULL means at rest.
//
// # Safety
// Handles must be live; `out` must be valid for writes.
enum KglabStatus kglab_energy(const struct KglabField *phi,
                              const struct KglabField *pi,
                              double m,
                              double *out);

// `exp(-i omega t) psi`, mode by mode.
//
// # Safety
// `psi` must be live; `out` must be valid for writes.
enum KglabStatus kglab_evolve_positive(const struct KglabField *psi,
                                       double m,
                                       double t,
                                       struct KglabField **out);

// `-i omega phi` for compactly supported `phi`.
//
// # Safety
// `phi` must be live; `out` must be valid for writes.
enum KglabStatus kglab_positivity_tail_witness(const struct KglabField *phi,
                                               double m,
                                               struct KglabField **out);

// Fraction of the L2 mass outside `|x| <= r0 + |t| + margin`.
//
// # Safety
// `field` must be live; `out` must be valid for writes.
enum KglabStatus kglab_cone_leakage(const struct KglabField *field,
                                    double r0,
                                    double t,
                                    double margin,
                                    double *out);

// Smallest `R` with `|f| < threshold` beyond it; `saturated` is set to 1
// when no such `R` below `L/2` exists.
//
// # Safety
// `field` must be live; outputs must be valid for writes.
enum KglabStatus kglab_support_radius(const struct KglabField *field,
                                      double threshold,
                                      double *radius,
                                      int32_t *saturated);

// Log-linear fit of `|f|` over `lo <= |x| <= hi`.
//
// # Safety
// `field` must be live; outputs must be valid for writes.
enum KglabStatus kglab_fit_tail(const struct KglabField *field,
                                double lo,
                                double hi,
                                double *rate,
                                double *r2);

// `Delta(t, .)` on an `n`-point grid with spacing `dx`, using the default
// quadrature settings.
//
// # Safety
// `out` must be valid for writes.
enum KglabStatus kglab_propagator_new(double t,
                                      size_t n,
                                      double dx,
                                      double m,
                                      struct KglabPropagator **out);

// Releases a propagator. NULL is ignored.
//
// # Safety
// `p` must come from this library and not be used afterwards.
void kglab_propagator_free(struct KglabPropagator *p);

// Copy of the `Delta` slice as a new field handle.
//
// # Safety
// `p` must be live; `out` must be valid for writes.
enum KglabStatus kglab_propagator_delta(const struct KglabPropagator *p, struct KglabField **out);

// Quadrature residual and, for `m > 0`, the difference-identity error
// (NaN when `m = 0`).
//
// # Safety
// `p` must be live; outputs must be valid for writes.
enum KglabStatus kglab_propagator_errors(const struct KglabPropagator *p,
                                         double *residual,
                                         double *identity_error,
                                         double *multiplier);

// Ratio of `max |Delta|` beyond `|t| + margin` to `max |Delta|` inside the
// cone; NaN at `t = 0`.
//
// # Safety
// `p` must be live; `ratio` must be valid for writes.
enum KglabStatus kglab_propagator_suppression(const struct KglabPropagator *p,
                                              double margin,
                                              double *ratio);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KGLAB_H */
