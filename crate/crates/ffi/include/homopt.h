#ifndef HOMOPT_H
#define HOMOPT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HomoptAlgorithm {
  HOMOPT_ALGORITHM_P = 0,
  HOMOPT_ALGORITHM_EI = 1,
} HomoptAlgorithm;

typedef enum HomoptEstimator {
  HOMOPT_ESTIMATOR_MLE = 0,
  HOMOPT_ESTIMATOR_SAMPLE = 1,
} HomoptEstimator;

typedef enum HomoptKernel {
  HOMOPT_KERNEL_EXPONENTIAL = 0,
  HOMOPT_KERNEL_SQUARED_EXPONENTIAL = 1,
} HomoptKernel;

typedef enum HomoptStatus {
  HOMOPT_STATUS_OK = 0,
  HOMOPT_STATUS_NULL_POINTER = 1,
  HOMOPT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Bad configuration or input data.
   */
  HOMOPT_STATUS_CONFIG = 3,
  /**
   * The computation itself failed.
   */
  HOMOPT_STATUS_NUMERICAL = 4,
  HOMOPT_STATUS_IO = 5,
  HOMOPT_STATUS_PANIC = 6,
} HomoptStatus;

/**
 * Opaque extended numeral.
 */
typedef struct HomoptNumeral HomoptNumeral;

/**
 * Opaque fitted Gaussian model.
 */
typedef struct HomoptPosterior HomoptPosterior;

/**
 * Opaque optimization trace.
 */
typedef struct HomoptTrace HomoptTrace;

/**
 * One trace row. Optional fields are NaN when absent; `grid_index` is -1
 * for a design point that is not on the candidate grid.
 */
typedef struct HomoptTraceRow {
  size_t iter;
  int64_t grid_index;
  double y;
  double criterion;
  double mu;
  double sigma2;
  double y_on;
  double best;
} HomoptTraceRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *homopt_last_error_message(void);

/**
 * # Safety
 * `s` must come from a `homopt_*` function returning `char *`, and must not
 * be freed twice.
 */
void homopt_string_free(char *s);

/**
 * Parses text such as `3*G^2 + 1.5 - 2*G^-1`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HomoptStatus homopt_numeral_parse(const char *text, struct HomoptNumeral **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum HomoptStatus homopt_numeral_from_f64(double value, struct HomoptNumeral **out);

/**
 * # Safety
 * `a` and `b` must be live numeral handles and `out` a valid pointer.
 */
enum HomoptStatus homopt_numeral_add(const struct HomoptNumeral *a,
                                     const struct HomoptNumeral *b,
                                     struct HomoptNumeral **out);

/**
 * # Safety
 * As [`homopt_numeral_add`].
 */
enum HomoptStatus homopt_numeral_sub(const struct HomoptNumeral *a,
                                     const struct HomoptNumeral *b,
                                     struct HomoptNumeral **out);

/**
 * # Safety
 * As [`homopt_numeral_add`].
 */
enum HomoptStatus homopt_numeral_mul(const struct HomoptNumeral *a,
                                     const struct HomoptNumeral *b,
                                     struct HomoptNumeral **out);

/**
 * Division by a single-term divisor only.
 *
 * # Safety
 * As [`homopt_numeral_add`].
 */
enum HomoptStatus homopt_numeral_div(const struct HomoptNumeral *a,
                                     const struct HomoptNumeral *b,
                                     struct HomoptNumeral **out);

/**
 * Writes -1, 0 or 1 to `out`.
 *
 * # Safety
 * `a` and `b` must be live numeral handles and `out` a valid pointer.
 */
enum HomoptStatus homopt_numeral_compare(const struct HomoptNumeral *a,
                                         const struct HomoptNumeral *b,
                                         int *out);

/**
 * Coefficient of `G^grade` (0 when absent).
 *
 * # Safety
 * `n` must be a live numeral handle and `out` a valid pointer.
 */
enum HomoptStatus homopt_numeral_coefficient(const struct HomoptNumeral *n,
                                             int32_t grade,
                                             double *out);

/**
 * Canonical text form; free with [`homopt_string_free`]. NULL if `n` is
 * NULL.
 *
 * # Safety
 * `n` must be NULL or a live numeral handle.
 */
char *homopt_numeral_to_string(const struct HomoptNumeral *n);

/**
 * # Safety
 * `n` must be NULL or a handle not yet freed.
 */
void homopt_numeral_free(struct HomoptNumeral *n);

/**
 * Fits the model to `n` points of dimension `dim` stored row-major in
 * `points`, with values `values`, inside the box `[lower, upper]`.
 *
 * # Safety
 * `points` must hold `n * dim` doubles, `values` `n`, `lower` and `upper`
 * `dim` each; `out` must be a valid pointer.
 */
enum HomoptStatus homopt_posterior_new(const double *points,
                                       const double *values,
                                       size_t n,
                                       size_t dim,
                                       const double *lower,
                                       const double *upper,
                                       enum HomoptKernel kernel,
                                       double decay,
                                       enum HomoptEstimator estimator,
                                       struct HomoptPosterior **out);

/**
 * Estimated `mu` and `sigma2`.
 *
 * # Safety
 * `p` must be a live posterior handle; `mu` and `sigma2` valid pointers.
 */
enum HomoptStatus homopt_posterior_parameters(const struct HomoptPosterior *p,
                                              double *mu,
                                              double *sigma2);

/**
 * Conditional mean and variance at `x` (`dim` entries).
 *
 * # Safety
 * `p` must be a live posterior handle, `x` must hold `dim` doubles and
 * `mean`, `variance` must be valid pointers.
 */
enum HomoptStatus homopt_posterior_moments(const struct HomoptPosterior *p,
                                           const double *x,
                                           size_t dim,
                                           double *mean,
                                           double *variance);

/**
 * # Safety
 * `p` must be NULL or a handle not yet freed.
 */
void homopt_posterior_free(struct HomoptPosterior *p);

/**
 * Runs the algorithm on a built-in objective (`sin3x`, `rastrigin1d`,
 * `gramacy-lee`, `quadratic`, `branin`) with the default design and grid.
 *
 * # Safety
 * `objective` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HomoptStatus homopt_run_builtin(enum HomoptAlgorithm algorithm,
                                     const char *objective,
                                     double epsilon,
                                     size_t budget,
                                     struct HomoptTrace **out);

/**
 * Runs the algorithm on a caller-supplied objective over `[lower, upper]`.
 * The callback receives the point (`dim` entries) and `user_data`.
 *
 * # Safety
 * `lower` and `upper` must hold `dim` doubles, `objective` must be safe to
 * call with `user_data`, and `out` must be a valid pointer.
 */
enum HomoptStatus homopt_run_callback(enum HomoptAlgorithm algorithm,
                                      double (*objective)(const double *x,
                                                          size_t dim,
                                                          void *user_data),
                                      void *user_data,
                                      const double *lower,
                                      const double *upper,
                                      size_t dim,
                                      double epsilon,
                                      size_t budget,
                                      struct HomoptTrace **out);

/**
 * Number of rows, initial design included. 0 if `t` is NULL.
 *
 * # Safety
 * `t` must be NULL or a live trace handle.
 */
size_t homopt_trace_len(const struct HomoptTrace *t);

/**
 * Copies row `i`; its point goes to `x` (at most `x_len` entries written).
 *
 * # Safety
 * `t` must be a live trace handle, `row` a valid pointer and `x` NULL or
 * writable for `x_len` doubles.
 */
enum HomoptStatus homopt_trace_row(const struct HomoptTrace *t,
                                   size_t i,
                                   struct HomoptTraceRow *row,
                                   double *x,
                                   size_t x_len);

/**
 * Writes the trace as CSV.
 *
 * # Safety
 * `t` must be a live trace handle and `path` a NUL-terminated string.
 */
enum HomoptStatus homopt_trace_write_csv(const struct HomoptTrace *t, const char *path);

/**
 * The trace as JSON; free with [`homopt_string_free`].
 *
 * # Safety
 * `t` must be NULL or a live trace handle.
 */
char *homopt_trace_to_json(const struct HomoptTrace *t);

/**
 * # Safety
 * `t` must be NULL or a handle not yet freed.
 */
void homopt_trace_free(struct HomoptTrace *t);

/**
 * Runs a built-in objective on `f` and `a * f + b` and writes 1 to
 * `passed` when every step selects the same grid point (near-ties
 * allowed), else 0. `a` and `b` are numeral strings; if either is
 * infinite or infinitesimal the extended-arithmetic path is used.
 *
 * # Safety
 * All pointers must be valid; strings NUL-terminated.
 */
enum HomoptStatus homopt_homogeneity_check(enum HomoptAlgorithm algorithm,
                                           const char *objective,
                                           const char *a,
                                           const char *b,
                                           size_t budget,
                                           int *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOMOPT_H */
