#ifndef ENTMON_H
#define ENTMON_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EmStatus {
  EM_STATUS_OK = 0,
  EM_STATUS_NULL_POINTER = 1,
  EM_STATUS_INVALID_ARGUMENT = 2,
  EM_STATUS_DIMENSION_MISMATCH = 3,
  EM_STATUS_INVALID_STATE = 4,
  EM_STATUS_PRECONDITION = 5,
  EM_STATUS_SEPARABLE_TARGET = 6,
  EM_STATUS_BUFFER_TOO_SMALL = 7,
  EM_STATUS_PANIC = 8,
} EmStatus;

// Bipartite pure state.
typedef struct EmPureState EmPureState;

// Sorted Schmidt spectrum.
typedef struct EmSpectrum EmSpectrum;

// One sample of a dilution curve.
typedef struct EmDilutionPoint {
  uint64_t r;
  double m_of_r;
  double tail;
  double fidelity_squared;
  double fidelity_normalized;
  double e1;
  double e_alpha;
} EmDilutionPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failed call on this thread, or null.
// Valid until the next failing call on the same thread.
const char *em_last_error(void);

// Library version as a static nul-terminated string.
const char *em_version(void);

// Creates a state on `C^dim_a ⊗ C^dim_b` from `dim_a*dim_b` row-major
// amplitudes, normalizing them. `im` may be null for real amplitudes.
//
// # Safety
// `re` (and `im` if non-null) must point to `dim_a*dim_b` doubles; `out`
// must be a valid pointer.
enum EmStatus em_state_new(size_t dim_a,
                           size_t dim_b,
                           const double *re,
                           const double *im,
                           struct EmPureState **out);

// # Safety
// `state` must come from [`em_state_new`] and not be freed twice. Null is
// ignored.
void em_state_free(struct EmPureState *state);

// Schmidt spectrum of a state as a new handle.
//
// # Safety
// `state` must be a live handle and `out` a valid pointer.
enum EmStatus em_state_schmidt(const struct EmPureState *state, struct EmSpectrum **out);

// Spectrum from `len` non-negative weights, normalized and sorted.
//
// # Safety
// `values` must point to `len` doubles and `out` must be valid.
enum EmStatus em_spectrum_new(const double *values, size_t len, struct EmSpectrum **out);

// Number of coefficients, or 0 for a null handle.
//
// # Safety
// `spectrum` must be a live handle or null.
size_t em_spectrum_len(const struct EmSpectrum *spectrum);

// Copies the coefficients (descending) into `buf` of capacity `cap`.
//
// # Safety
// `spectrum` must be a live handle and `buf` must hold `cap` doubles.
enum EmStatus em_spectrum_values(const struct EmSpectrum *spectrum, double *buf, size_t cap);

// # Safety
// `spectrum` must come from this library and not be freed twice. Null is
// ignored.
void em_spectrum_free(struct EmSpectrum *spectrum);

// α-entropy of entanglement in bits, `α ∈ [0, 1]`.
//
// # Safety
// `spectrum` must be a live handle and `out` a valid pointer.
enum EmStatus em_e_alpha(const struct EmSpectrum *spectrum, double alpha, double *out);

// Upper bound on the probability of converting `source` into `target` over
// a uniform α grid of `grid_points` points. `minimizing_alpha` may be null.
//
// # Safety
// Handles must be live; `value` must be valid.
enum EmStatus em_bound_single(const struct EmSpectrum *source,
                              const struct EmSpectrum *target,
                              size_t grid_points,
                              double *value,
                              double *minimizing_alpha);

// `Σ_{l≤r} C(n,l) cos²θ^(n-l) sin²θ^l` for `θ ∈ (0, π/4)`.
//
// # Safety
// `out` must be a valid pointer.
enum EmStatus em_tail_mass(double theta, uint64_t n_tilde, uint64_t r, double *out);

// Dilution curve at a single truncation fraction `x`.
//
// # Safety
// `out` must be a valid pointer.
enum EmStatus em_dilution_point(double theta,
                                uint64_t n_tilde,
                                double x,
                                double alpha,
                                struct EmDilutionPoint *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENTMON_H */
