#ifndef STAB_H
#define STAB_H

/* Generated by cbindgen from stab-ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StabStatus {
  STAB_STATUS_OK = 0,
  STAB_STATUS_NULL_POINTER = 1,
  STAB_STATUS_INVALID_ARGUMENT = 2,
  STAB_STATUS_NOT_CONVERGED = 3,
  STAB_STATUS_ADMISSIBILITY = 4,
  STAB_STATUS_NUMERICAL = 5,
  STAB_STATUS_IO = 6,
  STAB_STATUS_BUFFER_TOO_SMALL = 7,
  STAB_STATUS_PANIC = 8,
} StabStatus;

typedef enum StabAnsatz {
  STAB_ANSATZ_VORTEX_PAIR = 0,
  STAB_ANSATZ_MODULATED_PAIR = 1,
  STAB_ANSATZ_RANDOM_HARMONICS = 2,
  STAB_ANSATZ_HALF_CONSTANT = 3,
  STAB_ANSATZ_ZERO = 4,
} StabAnsatz;

typedef enum StabIdentity {
  STAB_IDENTITY_SPHERE_GL = 0,
  STAB_IDENTITY_SPHERE_YMH = 1,
  STAB_IDENTITY_CPN_LEMMA = 2,
} StabIdentity;

typedef struct StabGlState StabGlState;

/**
 * Icosphere mesh together with its finite-element operators.
 */
typedef struct StabMesh StabMesh;

typedef struct StabYmhState StabYmhState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *stab_status_str(enum StabStatus status);

/**
 * Copies the last error message of this thread into `buf` as a
 * NUL-terminated string and returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable bytes.
 */
size_t stab_last_error(char *buf, size_t len);

/**
 * # Safety
 * `out_mesh` must be a valid pointer.
 */
enum StabStatus stab_mesh_new(uint32_t level, struct StabMesh **out_mesh);

/**
 * # Safety
 * `mesh` must come from [`stab_mesh_new`]; the output pointers may be NULL.
 */
enum StabStatus stab_mesh_counts(const struct StabMesh *mesh,
                                 size_t *vertices,
                                 size_t *edges,
                                 size_t *faces);

/**
 * # Safety
 * `mesh` must be NULL or come from [`stab_mesh_new`] and not be freed twice.
 */
void stab_mesh_free(struct StabMesh *mesh);

/**
 * Initial GL configuration on `mesh` from one of the built-in ansatz fields.
 *
 * # Safety
 * `mesh` must be a live mesh handle and `out_state` a valid pointer.
 */
enum StabStatus stab_gl_state_new(const struct StabMesh *mesh,
                                  double epsilon,
                                  enum StabAnsatz ansatz,
                                  uint64_t seed,
                                  struct StabGlState **out_state);

/**
 * Replaces the state by a critical point reached from it.
 *
 * # Safety
 * `state` must be a live GL state handle.
 */
enum StabStatus stab_gl_solve(struct StabGlState *state);

/**
 * # Safety
 * `state` must be a live GL state handle; the output pointers may be NULL.
 */
enum StabStatus stab_gl_energy(const struct StabGlState *state, double *energy, double *residual);

/**
 * Copies the vertex values into `re` and `im`, each of length `len`.
 *
 * # Safety
 * `re` and `im` must point to `len` writable doubles.
 */
enum StabStatus stab_gl_values(const struct StabGlState *state, double *re, double *im, size_t len);

/**
 * # Safety
 * `state` must be NULL or a GL state handle not yet freed.
 */
void stab_gl_state_free(struct StabGlState *state);

/**
 * Initial YMH configuration of the given degree with unit section.
 *
 * # Safety
 * `mesh` must be a live mesh handle and `out_state` a valid pointer.
 */
enum StabStatus stab_ymh_state_new(const struct StabMesh *mesh,
                                   double epsilon,
                                   int64_t degree,
                                   struct StabYmhState **out_state);

/**
 * Replaces the state by a critical point of the same degree.
 *
 * # Safety
 * `state` must be a live YMH state handle.
 */
enum StabStatus stab_ymh_solve(struct StabYmhState *state);

/**
 * # Safety
 * `state` must be a live YMH state handle; the output pointers may be NULL.
 */
enum StabStatus stab_ymh_energy(const struct StabYmhState *state,
                                double *energy,
                                double *gradient,
                                int64_t *degree);

/**
 * # Safety
 * `re` and `im` must point to `len` writable doubles.
 */
enum StabStatus stab_ymh_values(const struct StabYmhState *state,
                                double *re,
                                double *im,
                                size_t len);

/**
 * # Safety
 * `state` must be NULL or a YMH state handle not yet freed.
 */
void stab_ymh_state_free(struct StabYmhState *state);

/**
 * Largest relative deviation of a sampled pointwise identity.
 *
 * # Safety
 * `max_deviation` must be a valid pointer; `scale` may be NULL.
 */
enum StabStatus stab_pointlab_check(enum StabIdentity identity,
                                    size_t n,
                                    size_t samples,
                                    uint64_t seed,
                                    double *max_deviation,
                                    double *scale);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STAB_H */
