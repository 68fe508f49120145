#ifndef HYPERRIG_H
#define HYPERRIG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum HrStatus {
  HR_STATUS_OK = 0,
  /*
   A required pointer was null.
   */
  HR_STATUS_NULL_POINTER = 1,
  /*
   Malformed argument (bad UTF-8, wrong length, out of range).
   */
  HR_STATUS_INVALID_ARGUMENT = 2,
  /*
   Unparseable chart or group description.
   */
  HR_STATUS_CONFIG = 3,
  /*
   The computation failed (singular map, degenerate input, ...).
   */
  HR_STATUS_COMPUTATION = 4,
  HR_STATUS_PANIC = 5,
} HrStatus;

/*
 Objective selector for [`hr_mesh_ball`].
 */
typedef enum HrBallObjective {
  HR_BALL_OBJECTIVE_ENCLOSING = 0,
  HR_BALL_OBJECTIVE_EMPTY = 1,
} HrBallObjective;

/*
 Parametrized hypersurface.
 */
typedef struct HrChart HrChart;

/*
 Finite isometry group acting freely on the sphere.
 */
typedef struct HrGroup HrGroup;

/*
 Sampled hypersurface with curvature data.
 */
typedef struct HrMesh HrMesh;

/*
 Result of a theorem check.
 */
typedef struct HrReport HrReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread (empty after success).
 The pointer stays valid until the next call on this thread.
 */
const char *hr_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *hr_version(void);

/*
 Releases a string returned by this library.

 # Safety
 `s` must come from this library and not have been freed already.
 */
void hr_string_free(char *s);

/*
 Builds a chart from a description such as `sphere:rho=pi/6`.

 # Safety
 `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum HrStatus hr_chart_from_spec(const char *spec, struct HrChart **out);

/*
 # Safety
 `chart` must come from `hr_chart_from_spec` (or be null).
 */
void hr_chart_free(struct HrChart *chart);

/*
 Number of parameters of the chart (0 for a null handle).

 # Safety
 `chart` must be a live handle or null.
 */
size_t hr_chart_param_dim(const struct HrChart *chart);

/*
 Samples the chart. `resolution` holds `len` cells-per-axis values; `len = 0` picks defaults.

 # Safety
 `chart` must be live, `resolution` readable for `len` entries, `out` writable.
 */
enum HrStatus hr_chart_sample(const struct HrChart *chart,
                              const size_t *resolution,
                              size_t len,
                              struct HrMesh **out);

/*
 # Safety
 `mesh` must come from `hr_chart_sample` (or be null).
 */
void hr_mesh_free(struct HrMesh *mesh);

/*
 Number of samples (0 for a null handle).

 # Safety
 `mesh` must be live or null.
 */
size_t hr_mesh_len(const struct HrMesh *mesh);

/*
 Dimension of the ambient Euclidean space (0 for a null handle).

 # Safety
 `mesh` must be live or null.
 */
size_t hr_mesh_ambient_dim(const struct HrMesh *mesh);

/*
 Copies sample `index` into `coords` (`len` must equal the ambient dimension).

 # Safety
 `mesh` must be live and `coords` writable for `len` doubles.
 */
enum HrStatus hr_mesh_point(const struct HrMesh *mesh, size_t index, double *coords, size_t len);

/*
 Smallest absolute principal curvature over all samples.

 # Safety
 `mesh` must be live and `out` writable.
 */
enum HrStatus hr_mesh_min_abs_curvature(const struct HrMesh *mesh, double *out);

/*
 Smallest enclosing or largest empty ball of the samples.
 `center` receives `len` coordinates (the ambient dimension).

 # Safety
 `mesh` must be live, `radius` writable, `center` writable for `len` doubles.
 */
enum HrStatus hr_mesh_ball(const struct HrMesh *mesh,
                           enum HrBallObjective objective,
                           uint64_t seed,
                           double *radius,
                           double *center,
                           size_t len);

/*
 Degree of the transport Gauss map at basepoint `p0` (`len` coordinates).

 # Safety
 `mesh` must be live, `p0` readable for `len` doubles, `degree` writable.
 */
enum HrStatus hr_mesh_gauss_degree(const struct HrMesh *mesh,
                                   const double *p0,
                                   size_t len,
                                   int64_t *degree);

/*
 Enclosing-ball curvature check with default settings.

 # Safety
 `mesh` must be live and `out` writable.
 */
enum HrStatus hr_check_theorem1(const struct HrMesh *mesh, struct HrReport **out);

/*
 # Safety
 `report` must come from this library (or be null).
 */
void hr_report_free(struct HrReport *report);

/*
 1 if the curvature hypothesis holds, 0 if not, -1 for a null handle.

 # Safety
 `report` must be live or null.
 */
int32_t hr_report_hypothesis_holds(const struct HrReport *report);

/*
 Curvature bound, radius and smallest curvature of a report.

 # Safety
 `report` must be live; each out pointer may be null to skip it.
 */
enum HrStatus hr_report_values(const struct HrReport *report,
                               double *bound,
                               double *radius,
                               double *min_abs_curvature);

/*
 Gauss map degree recorded in the report; `Computation` if none was computed.

 # Safety
 `report` must be live and `degree` writable.
 */
enum HrStatus hr_report_degree(const struct HrReport *report, int64_t *degree);

/*
 JSON rendering of the report; free with `hr_string_free`. Null on failure.

 # Safety
 `report` must be live or null.
 */
char *hr_report_to_json(const struct HrReport *report);

/*
 `{±I}` acting on `R^dim`.

 # Safety
 `out` must be writable.
 */
enum HrStatus hr_group_antipodal(size_t dim, struct HrGroup **out);

/*
 Cyclic group of order `k` on `R⁴` rotating two orthogonal planes by `2π/k` and `2πq/k`.

 # Safety
 `out` must be writable.
 */
enum HrStatus hr_group_lens(size_t k, size_t q, struct HrGroup **out);

/*
 Group from a JSON list of orthogonal matrices, identity first.

 # Safety
 `json` must be NUL-terminated and `out` writable.
 */
enum HrStatus hr_group_from_json(const char *json, struct HrGroup **out);

/*
 # Safety
 `group` must come from this library (or be null).
 */
void hr_group_free(struct HrGroup *group);

/*
 Group order (0 for a null handle).

 # Safety
 `group` must be live or null.
 */
size_t hr_group_order(const struct HrGroup *group);

/*
 `min_{g≠e} d(p, g p)`.

 # Safety
 `group` must be live, `p` readable for `len` doubles, `out` writable.
 */
enum HrStatus hr_group_separation(const struct HrGroup *group,
                                  const double *p,
                                  size_t len,
                                  double *out);

/*
 Quotient distance from `x` to the cut locus of `p0`; both have `len` coordinates.

 # Safety
 `group` must be live, `p0` and `x` readable for `len` doubles, `out` writable.
 */
enum HrStatus hr_cut_locus_distance(const struct HrGroup *group,
                                    const double *p0,
                                    const double *x,
                                    size_t len,
                                    double *out);

/*
 Runs the command-line driver with `argc` arguments (program name first) and returns its exit code.

 # Safety
 `argv` must hold `argc` NUL-terminated strings.
 */
int32_t hr_run_cli(int32_t argc, const char *const *argv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERRIG_H */
