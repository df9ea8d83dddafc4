#ifndef QMPHASE_H
#define QMPHASE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum QmStatus {
  QM_STATUS_OK = 0,
  QM_STATUS_NULL_POINTER = 1,
  QM_STATUS_INVALID_ARGUMENT = 2,
  QM_STATUS_NUMERIC_FAILURE = 3,
  QM_STATUS_BUFFER_TOO_SMALL = 4,
  QM_STATUS_MISMATCHED = 5,
  QM_STATUS_PANIC = 6,
} QmStatus;

typedef enum QmPhase {
  QM_PHASE_POLARIZED = 0,
  QM_PHASE_UNPOLARIZED = 1,
  QM_PHASE_ANTI_POLARIZED = 2,
} QmPhase;

// Opaque distribution handle.
typedef struct QmDistribution QmDistribution;

// Model parameters. The initial state is `(1, rho_z, rho_x)`.
typedef struct QmParams {
  double theta;
  double omega;
  double r_tau;
  // Number of measurements; must be even and at least 2.
  uint32_t n_meas;
  double rho_z;
  double rho_x;
} QmParams;

// Unnormalized conditioned Bloch vector of one histogram bin.
typedef struct QmState {
  double rho0;
  double rhoz;
  double rhox;
} QmState;

typedef struct QmPhaseLabel {
  enum QmPhase phase;
  double fm_argmax;
  double afm_argmax;
  bool conflict;
} QmPhaseLabel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *qm_version(void);

// Message for the most recent failure on this thread, or NULL. The
// pointer stays valid until the next failing call on the same thread.
const char *qm_last_error(void);

// Exact distribution of the number of up outcomes.
//
// # Safety
// `params` must point to a valid `QmParams`; `out` must be writable.
enum QmStatus qm_fm_distribution(const struct QmParams *params, struct QmDistribution **out);

// Exact distribution of the staggered (pairwise) order.
//
// # Safety
// Same as `qm_fm_distribution`.
enum QmStatus qm_afm_distribution(const struct QmParams *params, struct QmDistribution **out);

// Releases a handle. NULL is ignored.
//
// # Safety
// `d` must be NULL or a handle from this library that was not freed yet.
void qm_distribution_free(struct QmDistribution *d);

// Number of bins (N + 1), or 0 for NULL.
//
// # Safety
// `d` must be NULL or a live handle.
size_t qm_distribution_len(const struct QmDistribution *d);

// Copies the bin probabilities into `buf`, which must hold `len` doubles
// with `len >= qm_distribution_len(d)`.
//
// # Safety
// `d` must be a live handle and `buf` valid for `len` writes.
enum QmStatus qm_distribution_probabilities(const struct QmDistribution *d,
                                            double *buf,
                                            size_t len);

// Conditioned state and order parameter of bin `index`.
//
// # Safety
// `d` must be a live handle; `state` and `order_param` must be writable
// (either may be NULL to skip it).
enum QmStatus qm_distribution_bin(const struct QmDistribution *d,
                                  size_t index,
                                  struct QmState *state,
                                  double *order_param);

// Bin index of the most likely outcome (ties near zero go to zero).
//
// # Safety
// `d` must be a live handle and `out` writable.
enum QmStatus qm_distribution_argmax(const struct QmDistribution *d, size_t *out);

// Phase label from an FM and an AFM handle of the same experiment.
//
// # Safety
// `fm` and `afm` must be live handles and `out` writable.
enum QmStatus qm_classify(const struct QmDistribution *fm,
                          const struct QmDistribution *afm,
                          struct QmPhaseLabel *out);

// Computes both distributions and classifies in one call.
//
// # Safety
// `params` must point to a valid `QmParams` and `out` be writable.
enum QmStatus qm_classify_params(const struct QmParams *params, struct QmPhaseLabel *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QMPHASE_H */
