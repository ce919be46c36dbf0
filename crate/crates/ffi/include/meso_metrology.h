#ifndef MESO_METROLOGY_H
#define MESO_METROLOGY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MesoConvention {
  MESO_CONVENTION_RIGHT_HOT = 0,
  MESO_CONVENTION_LEFT_HOT = 1,
} MesoConvention;

typedef enum MesoMethod {
  MESO_METHOD_EXACT = 0,
  MESO_METHOD_LINEAR_RESPONSE = 1,
  MESO_METHOD_ZERO_TEMPERATURE = 2,
} MesoMethod;

typedef enum MesoStatus {
  MESO_STATUS_OK = 0,
  MESO_STATUS_NULL_POINTER = 1,
  MESO_STATUS_INVALID_ARGUMENT = 2,
  MESO_STATUS_PARSE = 3,
  MESO_STATUS_DOMAIN = 4,
  MESO_STATUS_QUADRATURE = 5,
  MESO_STATUS_DEGENERATE = 6,
  MESO_STATUS_DIVERGENT = 7,
  MESO_STATUS_ESTIMATOR_UNDEFINED = 8,
  MESO_STATUS_PANIC = 9,
} MesoStatus;

typedef enum MesoWeighting {
  MESO_WEIGHTING_UNIFORM = 0,
  MESO_WEIGHTING_TRAPEZOID_ENDPOINTS = 1,
} MesoWeighting;

/**
 * Opaque transmission model.
 */
typedef struct MesoModel MesoModel;

/**
 * Opaque pair of reservoirs.
 */
typedef struct MesoSetup MesoSetup;

typedef struct MesoQuadrature {
  double rel_tol;
  double abs_tol;
  double tail_multiplier;
  size_t max_subdivisions;
} MesoQuadrature;

typedef struct MesoTransport {
  double current;
  double noise;
  double dcurrent_dtheta;
  /**
   * `+inf` when `divergent` is set.
   */
  double gamma;
  double quad_error;
  bool divergent;
} MesoTransport;

typedef struct MesoOptimum {
  double theta_star;
  double gamma_max;
  size_t n_evals;
  bool refined;
} MesoOptimum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into this library from the same thread.
 */
const char *meso_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *meso_version(void);

struct MesoQuadrature meso_quadrature_default(void);

/**
 * Parses a model spec such as `lorentzian:gamma=0.1,theta=0`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum MesoStatus meso_model_parse(const char *spec, struct MesoModel **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MesoStatus meso_model_lorentzian(double gamma, double theta, struct MesoModel **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MesoStatus meso_model_comb(size_t n_dots,
                                double gamma,
                                double half_width,
                                double theta,
                                enum MesoWeighting weighting,
                                struct MesoModel **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MesoStatus meso_model_boxcar(double half_width, double theta, struct MesoModel **out);

/**
 * # Safety
 * `model` must be NULL or a handle from this library that has not been freed.
 */
void meso_model_free(struct MesoModel *model);

/**
 * Moves the model to `theta` in place.
 *
 * # Safety
 * `model` must be a live handle.
 */
enum MesoStatus meso_model_set_theta(struct MesoModel *model, double theta);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum MesoStatus meso_model_evaluate(const struct MesoModel *model, double energy, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MesoStatus meso_setup_new(double temperature,
                               double fermi_energy,
                               double bias,
                               enum MesoConvention convention,
                               struct MesoSetup **out);

/**
 * # Safety
 * `setup` must be NULL or a handle from this library that has not been freed.
 */
void meso_setup_free(struct MesoSetup *setup);

/**
 * Fermi-Dirac occupation; a Heaviside step at `temperature = 0`.
 *
 * # Safety
 * `out` must be writable.
 */
enum MesoStatus meso_fermi(double energy, double mu, double temperature, double *out);

/**
 * Current, noise, sensitivity and precision rate. `quad` may be NULL for the
 * default tolerances.
 *
 * # Safety
 * `model` and `setup` must be live handles; `quad` NULL or valid; `out` writable.
 */
enum MesoStatus meso_transport(const struct MesoModel *model,
                               const struct MesoSetup *setup,
                               const struct MesoQuadrature *quad,
                               struct MesoTransport *out);

/**
 * Closed-form boxcar current, noise and precision rate at `k_B T > 0`.
 * Any of the output pointers may be NULL to skip that quantity.
 *
 * # Safety
 * `setup` must be a live handle; non-NULL outputs must be writable.
 */
enum MesoStatus meso_boxcar_closed(const struct MesoSetup *setup,
                                   double half_width,
                                   double theta,
                                   double *current,
                                   double *noise,
                                   double *gamma);

/**
 * Maximises γ over θ. Pass NaN for both bounds to use the default search
 * interval and 0 for `grid_points` to use the default grid.
 *
 * # Safety
 * `model` and `setup` must be live handles; `quad` NULL or valid; `out` writable.
 */
enum MesoStatus meso_optimize(const struct MesoModel *model,
                              const struct MesoSetup *setup,
                              const struct MesoQuadrature *quad,
                              enum MesoMethod method,
                              double theta_min,
                              double theta_max,
                              size_t grid_points,
                              struct MesoOptimum *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MESO_METROLOGY_H */
