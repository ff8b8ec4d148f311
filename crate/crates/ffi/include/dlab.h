#ifndef DLAB_H
#define DLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DlabStatus {
  DLAB_STATUS_OK = 0,
  DLAB_STATUS_NULL_POINTER = 1,
  DLAB_STATUS_INVALID_ARGUMENT = 2,
  DLAB_STATUS_SOLVER_ABORT = 3,
  DLAB_STATUS_CHECK_FAILED = 4,
  DLAB_STATUS_IO = 5,
  DLAB_STATUS_BUFFER_TOO_SMALL = 6,
  DLAB_STATUS_PANIC = 7,
} DlabStatus;

// Space-time samples of a solution.
typedef struct DlabField DlabField;

typedef struct DlabNonlinearity DlabNonlinearity;

// Model space and node count, from a `[space]` configuration section.
typedef struct DlabSpace DlabSpace;

// Flat summary of the gradient-estimate check.
typedef struct DlabEstimate {
  double eps;
  double m;
  double big_m;
  double k;
  double alpha;
  double radius;
  double duration;
  double sup_h;
  double lhs_max;
  double bracket_min;
  double c_empirical;
  double c_conservative;
  double lemma_min_residual;
  double lemma_tol_disc;
  // 1 when the lemma residual is within its tolerance.
  int32_t lemma_holds;
} DlabEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length plus one.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t dlab_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *dlab_version(void);

// Builds a space from configuration text containing a `[space]` section.
//
// # Safety
// `config` must be a NUL-terminated string; `out_space` must be writable.
enum DlabStatus dlab_space_from_config(const char *config, struct DlabSpace **out_space);

// # Safety
// `space` must be null or a handle from this library, freed at most once.
void dlab_space_free(struct DlabSpace *space);

// # Safety
// `space` must be a live handle; `nodes` must be writable.
enum DlabStatus dlab_space_nodes(const struct DlabSpace *space, size_t *nodes);

// Grid coordinates into `buf`, which must hold the node count.
//
// # Safety
// `space` must be a live handle; `buf` must point to `len` writable doubles.
enum DlabStatus dlab_space_coordinates(const struct DlabSpace *space, double *buf, size_t len);

// Parses a catalog entry such as `allen_cahn` or `log{a=-1}`.
//
// # Safety
// `entry` must be a NUL-terminated string; `out_nl` must be writable.
enum DlabStatus dlab_nonlinearity_parse(const char *entry, struct DlabNonlinearity **out_nl);

// # Safety
// `nl` must be null or a handle from this library, freed at most once.
void dlab_nonlinearity_free(struct DlabNonlinearity *nl);

// H(u, ε) = (ε − 1) F(u)/u + F'(u).
//
// # Safety
// `nl` must be a live handle; `value` must be writable.
enum DlabStatus dlab_nonlinearity_h(const struct DlabNonlinearity *nl,
                                    double u,
                                    double eps,
                                    double *value);

// Window of ε with sup H ≤ 0 on [m, M]; `empty` is set to 1 when none
// exists.
//
// # Safety
// `nl` must be a live handle; the three outputs must be writable.
enum DlabStatus dlab_epsilon_window(const struct DlabNonlinearity *nl,
                                    double m,
                                    double big_m,
                                    double *lo,
                                    double *hi,
                                    int32_t *empty);

// Evolves `u0` (one value per node) over `duration` from `t_start`.
//
// # Safety
// Handles must be live; `u0` must point to `len` doubles; `out_field` must
// be writable.
enum DlabStatus dlab_solve(const struct DlabSpace *space,
                           const struct DlabNonlinearity *nl,
                           const double *u0,
                           size_t len,
                           double t_start,
                           double duration,
                           double dt,
                           struct DlabField **out_field);

// Samples a closed-form family (e.g. `gaussian_heat{shift=0.25}`) at
// `n_times` times spaced `dt` from `t_start`.
//
// # Safety
// `space` must be live; `family` NUL-terminated; `out_field` writable.
enum DlabStatus dlab_field_exact(const struct DlabSpace *space,
                                 const char *family,
                                 double t_start,
                                 double dt,
                                 size_t n_times,
                                 struct DlabField **out_field);

// # Safety
// `field` must be null or a handle from this library, freed at most once.
void dlab_field_free(struct DlabField *field);

// # Safety
// `field` must be live; `nodes` and `times` must be writable.
enum DlabStatus dlab_field_shape(const struct DlabField *field, size_t *nodes, size_t *times);

// Copies all values, time-major (node index fastest).
//
// # Safety
// `field` must be live; `buf` must point to `len` writable doubles.
enum DlabStatus dlab_field_values(const struct DlabField *field, double *buf, size_t len);

// Writes the binary snapshot of `field` to `path`.
//
// # Safety
// `field` must be live; `path` NUL-terminated.
enum DlabStatus dlab_field_write_snapshot(const struct DlabField *field, const char *path);

// Gradient-estimate check on the inner half of the field's domain.
// `r_probe` is the inner radius of the curvature probe; `c_v ≤ 0` selects
// the default discretisation constant.
//
// # Safety
// Handles must be live; `report` must be writable.
enum DlabStatus dlab_verify(const struct DlabField *field,
                            const struct DlabNonlinearity *nl,
                            double eps,
                            double r_probe,
                            double c_v,
                            struct DlabEstimate *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DLAB_H */
