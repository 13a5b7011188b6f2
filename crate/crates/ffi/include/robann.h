#ifndef ROBANN_H
#define ROBANN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum RobannStatus {
  ROBANN_STATUS_OK = 0,
  ROBANN_STATUS_NULL_POINTER = 1,
  ROBANN_STATUS_INVALID_ARGUMENT = 2,
  ROBANN_STATUS_DIMENSION_MISMATCH = 3,
  ROBANN_STATUS_MODE_MISMATCH = 4,
  ROBANN_STATUS_DEAD_POINT = 5,
  ROBANN_STATUS_QUERY_BUDGET_EXCEEDED = 6,
  ROBANN_STATUS_SIZING_VIOLATION = 7,
  ROBANN_STATUS_PARSE = 8,
  ROBANN_STATUS_IO = 9,
  // A Rust panic was caught at the boundary.
  ROBANN_STATUS_INTERNAL = 10,
} RobannStatus;

// What a query returned.
typedef enum RobannAnswerKind {
  ROBANN_ANSWER_KIND_POINT = 0,
  ROBANN_ANSWER_KIND_BOTTOM = 1,
  ROBANN_ANSWER_KIND_TIMEOUT = 2,
} RobannAnswerKind;

// Exponent function for the annulus optimizer.
typedef enum RobannRho {
  // `1/(2c-1)`
  ROBANN_RHO_HAMMING_OPT = 0,
  // `1/(2c^2-1)`
  ROBANN_RHO_L2_OPT = 1,
  // `1/c`
  ROBANN_RHO_BIT_SAMPLING = 2,
} RobannRho;

// A growable set of Hamming points.
typedef struct RobannDataset RobannDataset;

// Fair near-neighbor sampler.
typedef struct RobannFairIndex RobannFairIndex;

// Index that answers every query in the cube correctly with high probability.
typedef struct RobannForAllIndex RobannForAllIndex;

// Problem instance shared by the index constructors.
typedef struct RobannProblem {
  // Approximation factor, > 1.
  double c;
  // Near radius, > 0.
  double r;
  // Number of queries the index must survive.
  uint64_t queries;
  // Failure probability.
  double delta;
} RobannProblem;

typedef struct RobannExponent {
  uint64_t k_star;
  double beta;
  double k_crossover;
} RobannExponent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *robann_last_error(void);

// Library version as a static NUL-terminated string.
const char *robann_version(void);

// Creates an empty Hamming dataset of dimension `dim`.
//
// # Safety
// `out` must be valid for writes.
enum RobannStatus robann_dataset_new(size_t dim, struct RobannDataset **out);

// Appends a point given as `dim` bytes; its id is written to `out_id`.
//
// # Safety
// `ds` must come from [`robann_dataset_new`]; `bits` must point to `dim` bytes.
enum RobannStatus robann_dataset_push(struct RobannDataset *ds,
                                      const uint8_t *bits,
                                      size_t dim,
                                      uint32_t *out_id);

// Removes point `id`.
//
// # Safety
// `ds` must come from [`robann_dataset_new`].
enum RobannStatus robann_dataset_remove(struct RobannDataset *ds, uint32_t id);

// Number of live points.
//
// # Safety
// `ds` must come from [`robann_dataset_new`]; `out` must be valid for writes.
enum RobannStatus robann_dataset_len(const struct RobannDataset *ds, size_t *out);

// # Safety
// `ds` must come from [`robann_dataset_new`] or be null, and not be used afterwards.
void robann_dataset_free(struct RobannDataset *ds);

// Builds a fair sampler over a snapshot of `ds` with default constants.
//
// # Safety
// `ds` and `problem` must be valid; `out` must be valid for writes.
enum RobannStatus robann_fair_build(const struct RobannDataset *ds,
                                    const struct RobannProblem *problem,
                                    uint64_t seed,
                                    struct RobannFairIndex **out);

// Samples a near neighbor of the query. The query randomness is the stream
// `round` under `query_seed`, so equal arguments give equal answers.
// `out_id` is written only when the answer is a point.
//
// # Safety
// `idx` must come from [`robann_fair_build`]; `bits` must point to `dim` bytes.
enum RobannStatus robann_fair_query(const struct RobannFairIndex *idx,
                                    const uint8_t *bits,
                                    size_t dim,
                                    uint64_t query_seed,
                                    uint64_t round,
                                    enum RobannAnswerKind *out_kind,
                                    uint32_t *out_id);

// Inserts a point; the new id is written to `out_id`.
//
// # Safety
// `idx` must come from [`robann_fair_build`]; `bits` must point to `dim` bytes.
enum RobannStatus robann_fair_insert(struct RobannFairIndex *idx,
                                     const uint8_t *bits,
                                     size_t dim,
                                     uint32_t *out_id);

// # Safety
// `idx` must come from [`robann_fair_build`].
enum RobannStatus robann_fair_delete(struct RobannFairIndex *idx, uint32_t id);

// # Safety
// `idx` must come from [`robann_fair_build`] or be null, and not be used afterwards.
void robann_fair_free(struct RobannFairIndex *idx);

// Builds the for-all index over a snapshot of `ds`. Fails with
// `SizingViolation` when the table count cannot cover the whole cube.
//
// # Safety
// `ds` and `problem` must be valid; `out` must be valid for writes.
enum RobannStatus robann_forall_build(const struct RobannDataset *ds,
                                      const struct RobannProblem *problem,
                                      uint64_t seed,
                                      struct RobannForAllIndex **out);

// Deterministic query. `out_found` is set to 1 and `out_id` written when a
// point within `cr` is returned, else `out_found` is 0.
//
// # Safety
// `idx` must come from [`robann_forall_build`]; `bits` must point to `dim` bytes.
enum RobannStatus robann_forall_query(const struct RobannForAllIndex *idx,
                                      const uint8_t *bits,
                                      size_t dim,
                                      uint8_t *out_found,
                                      uint32_t *out_id);

// # Safety
// `idx` must come from [`robann_forall_build`] or be null, and not be used afterwards.
void robann_forall_free(struct RobannForAllIndex *idx);

// Best annulus count and exponent for approximation factor `c`.
//
// # Safety
// `out` must be valid for writes.
enum RobannStatus robann_exponent_optimize(double c,
                                           enum RobannRho rho,
                                           struct RobannExponent *out);

// Privacy of `k` adaptively composed `(eps, delta)` mechanisms with slack `delta_prime`.
//
// # Safety
// The out pointers must be valid for writes.
enum RobannStatus robann_advanced_composition(double eps,
                                              double delta,
                                              uint64_t k,
                                              double delta_prime,
                                              double *out_eps,
                                              double *out_delta);

// Privacy after subsampling `m` of `n` rows with replacement.
//
// # Safety
// The out pointers must be valid for writes.
enum RobannStatus robann_subsampling_amplification(double eps,
                                                   double delta,
                                                   uint64_t m,
                                                   uint64_t n,
                                                   double *out_eps,
                                                   double *out_delta);

// Copy count and subsample size of the robust decider at default coefficients.
//
// # Safety
// The out pointers must be valid for writes.
enum RobannStatus robann_decider_constants(uint64_t queries,
                                           double delta,
                                           double eps,
                                           uint64_t *out_copies,
                                           uint64_t *out_k_sub);

// Exponent of the discretized index at covering radius `cr/10`.
//
// # Safety
// `out` must be valid for writes.
enum RobannStatus robann_rho_prime(double c, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBANN_H */
