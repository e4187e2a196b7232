#ifndef CHOREOQEP_H
#define CHOREOQEP_H

#include <stddef.h>
#include <stdint.h>

typedef enum CqStatus {
  CQ_STATUS_OK = 0,
  CQ_STATUS_NULL_POINTER = 1,
  CQ_STATUS_INVALID_ARGUMENT = 2,
  CQ_STATUS_BUFFER_TOO_SMALL = 3,
  CQ_STATUS_ASSUMPTION_VIOLATION = 4,
  CQ_STATUS_NUMERICAL_FAILURE = 5,
  CQ_STATUS_NOT_CHOREOGRAPHIC = 6,
  CQ_STATUS_DELAY_RESONANT = 7,
  CQ_STATUS_EMPTY_SET = 8,
  CQ_STATUS_PANIC = 9,
} CqStatus;

/*
 Scale derivative with its step.
 */
typedef struct CqOperator CqOperator;

/*
 Pseudo-periodic trajectories of all particles.
 */
typedef struct CqSolution CqSolution;

/*
 Quadratic Lagrangian of `n` particles in `R^d`.
 */
typedef struct CqSpec CqSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message on this thread into `buf` (NUL-terminated,
 truncated to `capacity`) and returns its full length in bytes.

 # Safety
 `buf` must be null or point to `capacity` writable bytes.
 */
uintptr_t cq_last_error_message(char *buf, uintptr_t capacity);

/*
 Creates a Lagrangian from row-major `d×d` matrices `j1..j5` and vectors
 `j6`, `j7` of length `d`. `j3`, `j4`, `j5`, `j6`, `j7` may be null for zero.
 Symmetry of `j1..j4` and skew-symmetry of `j5` are enforced.

 # Safety
 Non-null array arguments must point to the stated number of doubles; `out` must be writable.
 */
enum CqStatus cq_spec_new(uintptr_t d,
                          uintptr_t n,
                          const double *j1,
                          const double *j2,
                          const double *j3,
                          const double *j4,
                          const double *j5,
                          const double *j6,
                          const double *j7,
                          struct CqSpec **out);

/*
 # Safety
 `spec` must be null or a handle from [`cq_spec_new`] not yet freed.
 */
void cq_spec_free(struct CqSpec *spec);

/*
 Operator with `2·order+1` coefficients `γ_{−N}..γ_N` and step `epsilon`.

 # Safety
 `gamma_re` must hold `2·order+1` doubles, `gamma_im` likewise or be null; `out` must be writable.
 */
enum CqStatus cq_operator_new(uintptr_t order,
                              const double *gamma_re,
                              const double *gamma_im,
                              double epsilon,
                              struct CqOperator **out);

/*
 Three-point operator `(−½+ik, −2ik, ½+ik)/ε`.

 # Safety
 `out` must be writable.
 */
enum CqStatus cq_operator_k_family(double k, double epsilon, struct CqOperator **out);

/*
 # Safety
 `op` must be null or a live operator handle.
 */
void cq_operator_free(struct CqOperator *op);

/*
 Roots of `det P_ν(λ)`, sorted by imaginary then real part. `*len` always
 receives the root count; `BufferTooSmall` is returned when it exceeds `capacity`.

 # Safety
 `re` and `im` must hold `capacity` doubles; `len` must be writable.
 */
enum CqStatus cq_classical_spectrum(const struct CqSpec *spec,
                                    double nu,
                                    double *re,
                                    double *im,
                                    uintptr_t capacity,
                                    uintptr_t *len);

/*
 The `4Nd` roots `λ` of the discrete pencil on the principal branch.

 # Safety
 As [`cq_classical_spectrum`]; `op` must be a live operator handle.
 */
enum CqStatus cq_transcendental_spectrum(const struct CqSpec *spec,
                                         const struct CqOperator *op,
                                         double nu,
                                         double *re,
                                         double *im,
                                         uintptr_t capacity,
                                         uintptr_t *len);

/*
 Hausdorff distance between two finite sets of complex numbers.

 # Safety
 Each array must hold its stated length of doubles; `out` must be writable.
 */
enum CqStatus cq_hausdorff(const double *a_re,
                           const double *a_im,
                           uintptr_t a_len,
                           const double *b_re,
                           const double *b_im,
                           uintptr_t b_len,
                           double *out);

/*
 Sets `*periodic` to 1 and `*period` to the least common period when all
 `e^{λt}` share one, else `*periodic = 0` and `*period = 0`.

 # Safety
 `re`, `im` must hold `len` doubles; `period`, `periodic` must be writable.
 */
enum CqStatus cq_commensurability(const double *re,
                                  const double *im,
                                  uintptr_t len,
                                  double tol,
                                  int64_t max_den,
                                  double *period,
                                  int32_t *periodic);

/*
 Classical Dirichlet problem on `[t0, tf]` with row-major `n×d` position arrays.

 # Safety
 `start`, `end` must hold `n·d` doubles; `out` must be writable.
 */
enum CqStatus cq_solve_dirichlet_cel(const struct CqSpec *spec,
                                     double t0,
                                     double tf,
                                     const double *start,
                                     const double *end,
                                     struct CqSolution **out);

/*
 Classical choreography with `len` complex amplitudes on the particle modes;
 writes its period to `*period`.

 # Safety
 `amp_re` must hold `len` doubles, `amp_im` likewise or be null; outputs must be writable.
 */
enum CqStatus cq_choreography_cel(const struct CqSpec *spec,
                                  const double *amp_re,
                                  const double *amp_im,
                                  uintptr_t len,
                                  double *period,
                                  struct CqSolution **out);

/*
 Writes the positions of every particle at `t` into row-major `n×d` arrays.

 # Safety
 `re`, `im` must hold `capacity` doubles.
 */
enum CqStatus cq_solution_eval(const struct CqSolution *sol,
                               double t,
                               double *re,
                               double *im,
                               uintptr_t capacity);

/*
 Number of particles and dimension of a solution.

 # Safety
 Outputs must be writable.
 */
enum CqStatus cq_solution_shape(const struct CqSolution *sol, uintptr_t *n, uintptr_t *d);

/*
 # Safety
 `sol` must be null or a live solution handle.
 */
void cq_solution_free(struct CqSolution *sol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHOREOQEP_H */
