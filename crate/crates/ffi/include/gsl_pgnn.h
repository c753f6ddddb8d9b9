#ifndef GSL_PGNN_H
#define GSL_PGNN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum GslStatus {
  GSL_STATUS_OK = 0,
  GSL_STATUS_NULL_POINTER = 1,
  GSL_STATUS_INVALID_ARGUMENT = 2,
  GSL_STATUS_SHAPE = 3,
  GSL_STATUS_UNSUPPORTED_VERSION = 4,
  GSL_STATUS_FORMAT = 5,
  GSL_STATUS_IO = 6,
  GSL_STATUS_NUMERICAL = 7,
  GSL_STATUS_PANIC = 8,
} GslStatus;

// Start points of the localizer.
typedef enum GslStartPolicy {
  // 3x3 grid over the source box.
  GSL_START_POLICY_GRID3 = 0,
  // Box center only.
  GSL_START_POLICY_CENTER = 1,
} GslStartPolicy;

// Factored forward solver for one mesh and coefficient set.
typedef struct GslFemSolver GslFemSolver;

// Nodal solution of one forward solve.
typedef struct GslField GslField;

// Trained surrogate.
typedef struct GslModel GslModel;

// Output of [`gsl_model_localize`].
typedef struct GslLocalization {
  // Estimated source position, km.
  double p_hat[2];
  double objective;
  size_t iterations;
  size_t starts_tried;
  bool converged;
} GslLocalization;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call on the same thread.
const char *gsl_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *gsl_version(void);

// Loads a checkpoint. On success `*out` owns a new handle.
enum GslStatus gsl_model_load(const char *path, struct GslModel **out);

void gsl_model_free(struct GslModel *model);

// Surrogate value and first derivatives at query `x` for source `p` (km).
// `grad_x` and `grad_p` may be null.
enum GslStatus gsl_model_eval(const struct GslModel *model,
                              const double *x,
                              const double *p,
                              double *value,
                              double *grad_x,
                              double *grad_p);

// Localizes the source from `n` measurements. `points` holds `2n`
// interleaved coordinates, `values` holds `n` concentrations.
enum GslStatus gsl_model_localize(const struct GslModel *model,
                                  const double *points,
                                  const double *values,
                                  size_t n,
                                  enum GslStartPolicy policy,
                                  struct GslLocalization *out);

// Assembles and factors the forward operator on an `n x n` node grid.
enum GslStatus gsl_fem_solver_new(size_t n_per_side,
                                  double kappa,
                                  double vx,
                                  double vy,
                                  struct GslFemSolver **out);

void gsl_fem_solver_free(struct GslFemSolver *solver);

// Field of a unit point source at `(px, py)`.
enum GslStatus gsl_fem_solve(const struct GslFemSolver *solver,
                             double px,
                             double py,
                             struct GslField **out);

// Interpolated value and element gradient at `(x, y)`. `grad` may be null.
enum GslStatus gsl_field_eval(const struct GslField *field,
                              double x,
                              double y,
                              double *value,
                              double *grad);

void gsl_field_free(struct GslField *field);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSL_PGNN_H */
