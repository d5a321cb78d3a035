#ifndef ASDFLOW_H
#define ASDFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum AsdStatus {
  ASD_STATUS_OK = 0,
  ASD_STATUS_ARGUMENT = 1,
  ASD_STATUS_DOMAIN = 2,
  ASD_STATUS_UNSUPPORTED = 3,
  ASD_STATUS_CLASSIFICATION = 4,
  ASD_STATUS_NO_LIFT = 5,
  ASD_STATUS_NUMERIC = 6,
  ASD_STATUS_IO = 7,
  ASD_STATUS_NULL_POINTER = 8,
  ASD_STATUS_PANIC = 9,
} AsdStatus;

/**
 * Why a simulation stopped.
 */
typedef enum AsdTermination {
  ASD_TERMINATION_REACHED_T_END = 0,
  ASD_TERMINATION_PINCH_DETECTED = 1,
  ASD_TERMINATION_DIVERGED = 2,
  ASD_TERMINATION_STEP_UNDERFLOW = 3,
} AsdTermination;

/**
 * Scalar diagnostic columns of a trajectory.
 */
typedef enum AsdColumn {
  ASD_COLUMN_TIME = 0,
  ASD_COLUMN_VOLUME = 1,
  ASD_COLUMN_AREA = 2,
  ASD_COLUMN_MIN_R = 3,
  ASD_COLUMN_MAX_R = 4,
} AsdColumn;

/**
 * Opaque periodic profile.
 */
typedef struct AsdProfile AsdProfile;

/**
 * Opaque simulation result.
 */
typedef struct AsdTrajectory AsdTrajectory;

/**
 * Time-integration settings; obtain defaults from [`asd_sim_config_default`].
 */
typedef struct AsdSimConfig {
  double dt0;
  double t_end;
  double stab_margin;
  double adapt_tol;
  double pinch_frac;
  uintptr_t snapshot_every;
  uintptr_t k_track;
  /**
   * 0: IMEX Euler, 1: IMEX trapezoid.
   */
  uint32_t scheme;
} AsdSimConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Empty after a success.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *asd_last_error_message(void);

/**
 * Creates a profile from `n` samples on the uniform grid of `[-π, π)`.
 *
 * # Safety
 * `values` must point to `n` readable doubles; `out` must be writable.
 */
enum AsdStatus asd_profile_new(const double *values, uintptr_t n, struct AsdProfile **out);

/**
 * Releases a profile. Null is ignored.
 *
 * # Safety
 * `p` must come from this library and not be used afterwards.
 */
void asd_profile_free(struct AsdProfile *p);

/**
 * Number of grid nodes, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live profile handle.
 */
uintptr_t asd_profile_len(const struct AsdProfile *p);

/**
 * Copies the samples into `out`, which must hold at least `len` doubles.
 *
 * # Safety
 * `p` must be a live handle and `out` writable for `len` doubles.
 */
enum AsdStatus asd_profile_values(const struct AsdProfile *p, double *out, uintptr_t len);

/**
 * Even `2π/k`-periodic unduloid with shape parameter `b` on an `n`-node grid.
 *
 * # Safety
 * `out` must be writable.
 */
enum AsdStatus asd_unduloid_profile(double b, uint32_t k, uintptr_t n, struct AsdProfile **out);

/**
 * Evaluates the surface diffusion operator `G(r)` into a new profile.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum AsdStatus asd_g(const struct AsdProfile *p, struct AsdProfile **out);

/**
 * Writes the growth rates `k²(1/radius² - k²)` for `k = 1..=k_max` into `out`.
 *
 * # Safety
 * `out` must be writable for `k_max` doubles.
 */
enum AsdStatus asd_cylinder_spectrum(double radius, uintptr_t k_max, double *out);

struct AsdSimConfig asd_sim_config_default(void);

/**
 * Integrates the flow from `p`. Pinch-off and divergence are reported
 * through [`asd_trajectory_termination`], not as errors.
 *
 * # Safety
 * `p` and `cfg` must be valid pointers and `out` writable.
 */
enum AsdStatus asd_simulate(const struct AsdProfile *p,
                            const struct AsdSimConfig *cfg,
                            struct AsdTrajectory **out);

/**
 * Releases a trajectory. Null is ignored.
 *
 * # Safety
 * `t` must come from this library and not be used afterwards.
 */
void asd_trajectory_free(struct AsdTrajectory *t);

/**
 * Number of recorded samples, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live trajectory handle.
 */
uintptr_t asd_trajectory_len(const struct AsdTrajectory *t);

/**
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum AsdStatus asd_trajectory_termination(const struct AsdTrajectory *t, enum AsdTermination *out);

/**
 * Copies one diagnostic column (length [`asd_trajectory_len`]) into `out`.
 *
 * # Safety
 * `t` must be a live handle and `out` writable for `len` doubles.
 */
enum AsdStatus asd_trajectory_column(const struct AsdTrajectory *t,
                                     enum AsdColumn column,
                                     double *out,
                                     uintptr_t len);

/**
 * Copies `|ĥ(k)|` over time for a tracked mode `1 <= k <= k_track`.
 *
 * # Safety
 * `t` must be a live handle and `out` writable for `len` doubles.
 */
enum AsdStatus asd_trajectory_mode_amplitude(const struct AsdTrajectory *t,
                                             uintptr_t k,
                                             double *out,
                                             uintptr_t len);

/**
 * Copies the last state of the trajectory into a new profile.
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum AsdStatus asd_trajectory_final_profile(const struct AsdTrajectory *t, struct AsdProfile **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASDFLOW_H */
