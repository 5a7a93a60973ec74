#ifndef GAUGE_LAB_H
#define GAUGE_LAB_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GlStatus {
  GL_STATUS_OK = 0,
  GL_STATUS_NULL_POINTER = 1,
  GL_STATUS_INVALID_UTF8 = 2,
  GL_STATUS_SYNTAX = 3,
  GL_STATUS_UNBOUND_SYMBOL = 4,
  GL_STATUS_INVALID_ARGUMENT = 5,
  GL_STATUS_NOT_SEPARABLE = 6,
  GL_STATUS_NOT_GAUGE_EQUIVALENT = 7,
  GL_STATUS_NUMERICAL_FAILURE = 8,
  GL_STATUS_CONFIG = 9,
  GL_STATUS_IO = 10,
  GL_STATUS_PANIC = 11,
} GlStatus;

typedef enum GlVar {
  GL_VAR_X = 0,
  GL_VAR_T = 1,
} GlVar;

typedef enum GlGaugeClass {
  GL_GAUGE_CLASS_INVARIANT = 0,
  GL_GAUGE_CLASS_DIFFERENCE_PRESERVING = 1,
  GL_GAUGE_CLASS_GENERAL = 2,
} GlGaugeClass;

typedef enum GlKinetic {
  GL_KINETIC_SECOND_ORDER = 0,
  GL_KINETIC_FOURTH_ORDER = 1,
} GlKinetic;

typedef enum GlCoupling {
  GL_COUPLING_PEIERLS = 0,
  GL_COUPLING_SYMMETRIC = 1,
} GlCoupling;

/**
 * Parsed expression.
 */
typedef struct GlExpr GlExpr;

/**
 * Grid, physical parameters, discretization and constants.
 */
typedef struct GlModel GlModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Valid until the next
 * failing call on the same thread; never null.
 */
const char *gl_last_error(void);

/**
 * Library version as a static string.
 */
const char *gl_version(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void gl_string_free(char *s);

/**
 * # Safety
 * `source` must be a NUL-terminated string; `out` must be writable.
 */
enum GlStatus gl_expr_parse(const char *source, struct GlExpr **out);

/**
 * # Safety
 * `e` must come from this library and not have been freed.
 */
void gl_expr_free(struct GlExpr *e);

/**
 * Canonical text of `e`; free with [`gl_string_free`].
 *
 * # Safety
 * `e` must be a live handle; `out` must be writable.
 */
enum GlStatus gl_expr_render(const struct GlExpr *e, char **out);

/**
 * Simplified partial derivative as a new handle.
 *
 * # Safety
 * `e` must be a live handle; `out` must be writable.
 */
enum GlStatus gl_expr_differentiate(const struct GlExpr *e, enum GlVar var, struct GlExpr **out);

/**
 * Value at `(x, t)` with `count` named constants.
 *
 * # Safety
 * `names` and `values` must each hold `count` entries; `out` must be
 * writable.
 */
enum GlStatus gl_expr_evaluate(const struct GlExpr *e,
                               double x,
                               double t,
                               const char *const *names,
                               const double *values,
                               size_t count,
                               double *out);

/**
 * Classifies a gauge function given as text. `proved` is set when the
 * result did not rely on sampling.
 *
 * # Safety
 * `chi` must be NUL-terminated; `names`/`values` hold `count` entries;
 * `class` and `proved` must be writable.
 */
enum GlStatus gl_classify(const char *chi,
                          const char *const *names,
                          const double *values,
                          size_t count,
                          enum GlGaugeClass *class_,
                          bool *proved);

/**
 * New model on `[x_min, x_max]` with `n` nodes.
 *
 * # Safety
 * `out` must be writable.
 */
enum GlStatus gl_model_new(double x_min,
                           double x_max,
                           size_t n,
                           double hbar,
                           double mass,
                           double charge,
                           struct GlModel **out);

/**
 * # Safety
 * `m` must come from this library and not have been freed.
 */
void gl_model_free(struct GlModel *m);

/**
 * Binds a named constant. `hbar`, `m` and `e` stay tied to the physical
 * parameters.
 *
 * # Safety
 * `m` must be a live handle; `name` must be NUL-terminated.
 */
enum GlStatus gl_model_set_constant(struct GlModel *m, const char *name, double value);

/**
 * # Safety
 * `m` must be a live handle.
 */
enum GlStatus gl_model_set_discretization(struct GlModel *m,
                                          enum GlKinetic kinetic,
                                          enum GlCoupling coupling);

/**
 * Writes the `k` lowest eigenvalues of the Hamiltonian for potentials
 * `(phi, a)` at time `t` into `out`.
 *
 * # Safety
 * `m` must be a live handle, `phi` and `a` NUL-terminated, `out` must hold
 * `k` doubles.
 */
enum GlStatus gl_spectrum(const struct GlModel *m,
                          const char *phi,
                          const char *a,
                          double t,
                          size_t k,
                          double *out);

/**
 * `-e·dg/dt` for a separable gauge function.
 *
 * # Safety
 * `m` must be a live handle, `chi` NUL-terminated, `out` writable.
 */
enum GlStatus gl_predicted_shift(const struct GlModel *m, const char *chi, double t, double *out);

/**
 * Lattice mismatch between transforming the potentials and conjugating the
 * Hamiltonian.
 *
 * # Safety
 * `m` must be a live handle, strings NUL-terminated, `out` writable.
 */
enum GlStatus gl_covariance_residual(const struct GlModel *m,
                                     const char *phi,
                                     const char *a,
                                     const char *chi,
                                     double t,
                                     double *out);

/**
 * Runs an experiment from TOML text. `report_json` receives the JSON
 * report (free with [`gl_string_free`]); `passed` is set from its
 * assertions.
 *
 * # Safety
 * `config_toml` must be NUL-terminated; `report_json` and `passed` must be
 * writable.
 */
enum GlStatus gl_run_experiment(const char *config_toml, char **report_json, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAUGE_LAB_H */
