#ifndef SURFACE_LAB_H
#define SURFACE_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum sl_status {
  SL_OK = 0,
  SL_NULL_POINTER = 1,
  SL_INVALID_ARGUMENT = 2,
  SL_CALIBRATION = 3,
  SL_DATA = 4,
  SL_IO = 5,
  SL_RESOURCE = 6,
  SL_INTERNAL = 7,
} sl_status;

typedef enum sl_basis {
  SL_BASIS_Z = 0,
  SL_BASIS_X = 1,
} sl_basis;

typedef enum sl_scheme {
  SL_SCHEME_NONE = 0,
  SL_SCHEME_DATA = 1,
  SL_SCHEME_ANCILLA = 2,
  SL_SCHEME_BOTH = 3,
} sl_scheme;

/**
 * Calibration table (per-qubit coherence, readout and gate errors).
 */
typedef struct SlCalibration SlCalibration;

/**
 * One simulated, detected and decoded memory experiment.
 */
typedef struct SlMemoryRun SlMemoryRun;

/**
 * Fraction of correct logical outcomes among the shots a scheme keeps.
 */
typedef struct sl_fidelity {
  double fidelity;
  double std_error;
  uint64_t retained;
  uint64_t total;
} sl_fidelity;

/**
 * Fitted logical decay.
 */
typedef struct sl_fit {
  double epsilon;
  double k0;
  double residual;
} sl_fit;

typedef struct sl_xeb_result {
  double fidelity;
  double std_error;
  /**
   * NaN for noiseless runs.
   */
  double predicted;
} sl_xeb_result;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next `sl_` call on the same thread.
 */
const char *sl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sl_version(void);

/**
 * The built-in calibration table.
 */
enum sl_status sl_calibration_default(struct SlCalibration **out);

/**
 * Loads a calibration JSON file.
 */
enum sl_status sl_calibration_load(const char *path, struct SlCalibration **out);

void sl_calibration_free(struct SlCalibration *cal);

/**
 * Duration of one error-correction cycle in microseconds.
 */
enum sl_status sl_cycle_duration_us(const struct SlCalibration *cal, double *out);

/**
 * Simulates `shots` runs of a distance-`distance` memory for `cycles`
 * cycles, extracts detection events and decodes them.
 */
enum sl_status sl_memory_run(const struct SlCalibration *cal,
                             uint32_t distance,
                             enum sl_basis basis,
                             uint32_t cycles,
                             uint64_t shots,
                             uint64_t seed,
                             bool noisy,
                             struct SlMemoryRun **out);

void sl_memory_free(struct SlMemoryRun *run);

/**
 * Number of detectors (ancillas times rounds, including the final round).
 */
enum sl_status sl_memory_detectors(const struct SlMemoryRun *run, uint64_t *out);

/**
 * Total number of detection events over all shots.
 */
enum sl_status sl_memory_event_count(const struct SlMemoryRun *run, uint64_t *out);

/**
 * Detection-event fraction of `ancilla` (index among the checked
 * stabilizers) at `round` (1-based).
 */
enum sl_status sl_memory_def(const struct SlMemoryRun *run,
                             uint32_t ancilla,
                             uint32_t round,
                             double *out);

/**
 * Logical fidelity after post-selection with `scheme`, raw or decoded.
 */
enum sl_status sl_memory_fidelity(const struct SlMemoryRun *run,
                                  enum sl_scheme scheme,
                                  bool decoded,
                                  struct sl_fidelity *out);

/**
 * Fits `F(k) = (1 + (1 - 2ε)^(k - k0)) / 2` to `n` points.
 */
enum sl_status sl_fit_decay(const double *ks,
                            const double *fidelities,
                            size_t n,
                            struct sl_fit *out);

/**
 * `τ_cycle / (2ε)`; infinity when `epsilon` is zero.
 */
enum sl_status sl_logical_lifetime(double epsilon, double tau_cycle_us, double *out);

/**
 * Cross-entropy benchmark of the random circuit generated from `seed`.
 */
enum sl_status sl_xeb_run(const struct SlCalibration *cal,
                          uint64_t seed,
                          uint64_t samples,
                          uint64_t trajectories,
                          bool noisy,
                          struct sl_xeb_result *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SURFACE_LAB_H */
