#ifndef NACIFS_H
#define NACIFS_H

/* Generated by cbindgen from the nacifs-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible library call. Zero means success; nonzero codes
// partition failures by which stage of a run they invalidate.
typedef enum NacifsStatus {
  // The call succeeded and all output parameters are set.
  NACIFS_STATUS_OK = 0,
  // Null pointer, malformed UTF-8, or an internal invariant failure.
  NACIFS_STATUS_BAD_INPUT = 1,
  // The input could not be parsed or describes an impossible request.
  NACIFS_STATUS_CONFIG = 2,
  // The system's geometry fails a contraction, containment, or
  // separation requirement.
  NACIFS_STATUS_VALIDATION = 3,
  // An estimate could not be produced (budget, depth, or degeneracy).
  NACIFS_STATUS_ESTIMATION = 4,
} NacifsStatus;

// Opaque handle to a Monte-Carlo cylinder-measure estimate.
typedef struct NacifsMeasure NacifsMeasure;

// Opaque handle to a validated contraction system.
typedef struct NacifsSystem NacifsSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the library version as a static NUL-terminated string.
// The pointer must not be freed.
const char *nacifs_version(void);

// Returns the message of the most recent failure on the calling thread,
// or null if no failure has occurred. The pointer stays valid until the
// next failing call on the same thread and must not be freed.
const char *nacifs_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be a pointer previously returned by a `nacifs_*` call that
// documents `nacifs_string_free` as its release function.
void nacifs_string_free(char *s);

// Parses a system from a JSON document and validates its explicit
// generations. On success writes a new handle to `out`.
//
// # Safety
// `json` must point to a NUL-terminated string and `out` to writable
// storage for one pointer.
enum NacifsStatus nacifs_system_from_json(const char *json, struct NacifsSystem **out);

// Reads a JSON system description from a file path.
//
// # Safety
// `path` must point to a NUL-terminated string and `out` to writable
// storage for one pointer.
enum NacifsStatus nacifs_system_load(const char *path, struct NacifsSystem **out);

// Releases a system handle. Null is ignored.
//
// # Safety
// `sys` must be null or a pointer from a `nacifs_system_*` constructor
// that has not been freed already.
void nacifs_system_free(struct NacifsSystem *sys);

// Number of generations the system can materialize.
// Returns 0 for a null handle.
//
// # Safety
// `sys` must be null or a live system handle.
size_t nacifs_system_horizon(const struct NacifsSystem *sys);

// Writes the branch count of one generation to `out`.
//
// # Safety
// `sys` must be a live system handle and `out` writable.
enum NacifsStatus nacifs_system_degree(const struct NacifsSystem *sys,
                                       size_t generation,
                                       size_t *out);

// Re-checks contraction, containment, and separation for generations
// `0..upto`.
//
// # Safety
// `sys` must be a live system handle.
enum NacifsStatus nacifs_system_validate(const struct NacifsSystem *sys, size_t upto);

// Writes the sup-norm coefficient distance between two systems over
// generations `0..upto`, weighted by the localization radius.
//
// # Safety
// `a` and `b` must be live system handles and `out` writable.
enum NacifsStatus nacifs_system_distance(const struct NacifsSystem *a,
                                         const struct NacifsSystem *b,
                                         size_t upto,
                                         double *out);

// Runs walk-on-spheres walkers against the depth-`approx_depth` disk
// approximation and tallies exits on depth-`assign_depth` cylinders.
// On success writes a new measure handle to `out`.
//
// # Safety
// `sys` must be a live system handle and `out` writable storage for one
// pointer.
enum NacifsStatus nacifs_measure_estimate(const struct NacifsSystem *sys,
                                          size_t offset,
                                          size_t approx_depth,
                                          size_t assign_depth,
                                          uint64_t walkers,
                                          uint64_t seed,
                                          struct NacifsMeasure **out);

// Releases a measure handle. Null is ignored.
//
// # Safety
// `m` must be null or a pointer from `nacifs_measure_estimate` that has
// not been freed already.
void nacifs_measure_free(struct NacifsMeasure *m);

// Total number of walkers absorbed into the tally.
// Returns 0 for a null handle.
//
// # Safety
// `m` must be null or a live measure handle.
uint64_t nacifs_measure_total(const struct NacifsMeasure *m);

// Writes the estimated probability of the cylinder named by `letters`
// (branch indices, one per generation from the estimate's offset) and its
// binomial standard error.
//
// # Safety
// `m` must be a live measure handle, `letters` must point to `len`
// readable entries (or be null when `len` is zero), and the output
// pointers must be writable.
enum NacifsStatus nacifs_measure_value(const struct NacifsMeasure *m,
                                       const uint32_t *letters,
                                       size_t len,
                                       double *out_value,
                                       double *out_stderr);

// Serializes the full cylinder table as CSV into a newly allocated string
// written to `out`; release it with `nacifs_string_free`.
//
// # Safety
// `m` must be a live measure handle and `out` writable storage for one
// pointer.
enum NacifsStatus nacifs_measure_csv(const struct NacifsMeasure *m, char **out);

// Computes the entropy-to-contraction ratio interval over depths
// `1..=nmax` and writes its endpoints. With `use_harmonic` false the
// uniform branch measure is used and no walkers run; with it true a
// walk-on-spheres estimate with the given budget and seed backs the
// ratios.
//
// # Safety
// `sys` must be a live system handle and `out_lo`, `out_hi` writable.
enum NacifsStatus nacifs_dimension_interval(const struct NacifsSystem *sys,
                                            size_t nmax,
                                            size_t window,
                                            uint64_t walkers,
                                            uint64_t seed,
                                            bool use_harmonic,
                                            double *out_lo,
                                            double *out_hi);

// Writes the continuity exponent `ln(1 - eta) / ln(eta (1 - eta))`
// governing how fast measure distances shrink with coefficient distance.
//
// # Safety
// `out` must be writable.
enum NacifsStatus nacifs_alpha_exponent(double eta, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NACIFS_H */
