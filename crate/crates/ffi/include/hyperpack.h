#ifndef HYPERPACK_H
#define HYPERPACK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HpMethod {
  HP_METHOD_CALABI = 0,
  HP_METHOD_NEWTON = 1,
  HP_METHOD_GRADIENT = 2,
} HpMethod;

typedef enum HpSolveStatus {
  HP_SOLVE_STATUS_CONVERGED = 0,
  HP_SOLVE_STATUS_MAX_STEPS = 1,
  HP_SOLVE_STATUS_DIVERGED = 2,
} HpSolveStatus;

// Result code of every fallible call.
typedef enum HpStatus {
  HP_STATUS_OK = 0,
  HP_STATUS_NULL_POINTER = 1,
  HP_STATUS_INVALID_ARGUMENT = 2,
  HP_STATUS_PARSE_ERROR = 3,
  HP_STATUS_DOMAIN_ERROR = 4,
  HP_STATUS_NO_CONVERGENCE = 5,
  HP_STATUS_INADMISSIBLE = 6,
  HP_STATUS_NOT_POSITIVE_DEFINITE = 7,
  HP_STATUS_PANIC = 99,
} HpStatus;

// A validated cell complex, with the targets of the document it came from, if any.
typedef struct HpComplex HpComplex;

typedef struct HpSolveOptions {
  enum HpMethod method;
  // Exponent of the p-Laplacian, Calabi only.
  double p;
  double dt;
  double dt_max;
  double tol;
  size_t max_steps;
  // Run even when the admissibility precheck finds a violation.
  bool force;
} HpSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call into this library on the same thread.
const char *hp_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *hp_version(void);

// Parses a JSON problem document. Its targets, if present, are kept with the handle.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum HpStatus hp_complex_from_json(const char *json, struct HpComplex **out);

// Builds a complex on vertices `0..n_vertices`. Face `f` has `face_sizes[f]`
// vertices, listed consecutively in `face_vertices`, and Gaussian curvature
// `gauss_curvatures[f]`.
//
// # Safety
// Arrays must hold `n_faces` entries (`face_vertices` the sum of the sizes); `out` must be writable.
enum HpStatus hp_complex_new(size_t n_vertices,
                             size_t n_faces,
                             const size_t *face_sizes,
                             const size_t *face_vertices,
                             const double *gauss_curvatures,
                             struct HpComplex **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `complex` must come from this library and not be used afterwards.
void hp_complex_free(struct HpComplex *complex);

// Number of vertices, 0 for a null handle.
//
// # Safety
// `complex` must be null or a live handle.
size_t hp_complex_vertex_count(const struct HpComplex *complex);

// # Safety
// `complex` must be null or a live handle.
size_t hp_complex_face_count(const struct HpComplex *complex);

// Copies the document targets into `out` (length `n`).
//
// # Safety
// `complex` must be a live handle and `out` writable for `n` doubles.
enum HpStatus hp_complex_targets(const struct HpComplex *complex, double *out, size_t n);

// Total geodesic curvature `L` at every vertex for curvatures `k`.
//
// # Safety
// `k` and `out_l` must hold `n` doubles.
enum HpStatus hp_forward(const struct HpComplex *complex, const double *k, size_t n, double *out_l);

// Jacobian `∂L_i/∂(ln k_j)`, row-major into `out_m` (`n * n` doubles).
//
// # Safety
// `k` must hold `n` doubles and `out_m` `n * n`.
enum HpStatus hp_jacobian(const struct HpComplex *complex,
                          const double *k,
                          size_t n,
                          double *out_m);

// Exhaustive admissibility check. `targets` may be null to use the
// document targets. Writes the verdict and the smallest subset slack.
//
// # Safety
// `targets` must be null or hold `n` doubles; outputs may be null.
enum HpStatus hp_check(const struct HpComplex *complex,
                       const double *targets,
                       size_t n,
                       bool *out_admissible,
                       double *out_slack);

struct HpSolveOptions hp_solve_options_default(void);

// Solves for curvatures realizing `targets` (null: document targets),
// starting from `initial_k` (null: all horocycles). Writes the final
// curvatures to `out_k` even when the solver stops without converging.
//
// # Safety
// `targets`, `initial_k` null or `n` doubles; `out_k` writable for `n`; other outputs may be null.
enum HpStatus hp_solve(const struct HpComplex *complex,
                       const double *targets,
                       const double *initial_k,
                       size_t n,
                       const struct HpSolveOptions *options,
                       double *out_k,
                       enum HpSolveStatus *out_status,
                       size_t *out_steps,
                       double *out_residual);

// Packs one face with vertex curvatures `k` and Gaussian curvature `gauss_curvature`.
// Writes the dual curvature, the per-vertex arc curvatures and the face area.
//
// # Safety
// `k` and `out_l` must hold `n` doubles; scalar outputs may be null.
enum HpStatus hp_face_solve(const double *k,
                            size_t n,
                            double gauss_curvature,
                            double *out_dual_curvature,
                            double *out_l,
                            double *out_area);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERPACK_H */
