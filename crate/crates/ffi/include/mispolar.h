#ifndef MISPOLAR_H
#define MISPOLAR_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum MispolarStatus {
  MISPOLAR_STATUS_OK = 0,
  MISPOLAR_STATUS_INVALID_ARGUMENT = 1,
  MISPOLAR_STATUS_VALIDATION_FAILED = 2,
  MISPOLAR_STATUS_RESOURCE_CAP = 3,
  MISPOLAR_STATUS_NON_CONVERGENCE = 4,
  MISPOLAR_STATUS_IO = 5,
} MispolarStatus;

// Opaque handle to a symmetric channel pair.
typedef struct MispolarPair MispolarPair;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the last error message for this thread, or NULL if none.
// The pointer is valid until the next failing call on the same thread.
const char *mispolar_last_error(void);

// Loads a pair from a JSON file into a new handle.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be a valid pointer.
enum MispolarStatus mispolar_pair_load(const char *path, struct MispolarPair **out);

// Builds a pair from row-major probability tables.
//
// `w` and `v` are length `2 * l` (row 0 then row 1); `pi` is length `l`.
//
// # Safety
// All pointers must reference buffers of the stated lengths.
enum MispolarStatus mispolar_pair_new(uintptr_t l,
                                      const double *w,
                                      const double *v,
                                      const uintptr_t *pi,
                                      struct MispolarPair **out);

// Writes a pair to a JSON file.
//
// # Safety
// `pair` must be a live handle; `path` a NUL-terminated string.
enum MispolarStatus mispolar_pair_save(const struct MispolarPair *pair, const char *path);

// Returns the output alphabet size, or 0 for a NULL handle.
//
// # Safety
// `pair` must be a live handle or NULL.
uintptr_t mispolar_pair_num_outputs(const struct MispolarPair *pair);

// Frees a handle. NULL is allowed.
//
// # Safety
// `pair` must have come from this library and not be freed twice.
void mispolar_pair_free(struct MispolarPair *pair);

// Computes C(W,V) and the tilting exponent alpha.
//
// # Safety
// `pair` must be a live handle; out-pointers may be NULL to skip a field.
enum MispolarStatus mispolar_capacity(const struct MispolarPair *pair,
                                      double *out_capacity,
                                      double *out_alpha);

// Computes the mismatched mutual information I(W,V); -inf is possible.
//
// # Safety
// `pair` must be a live handle; `out` a valid pointer.
enum MispolarStatus mispolar_mismatched_info(const struct MispolarPair *pair, double *out);

// Applies a sign sequence ('+'/'-' string) of polar transforms.
//
// # Safety
// `pair` must be a live handle; `seq` NUL-terminated; `out` valid.
enum MispolarStatus mispolar_transform(const struct MispolarPair *pair,
                                       const char *seq,
                                       uintptr_t alphabet_cap,
                                       struct MispolarPair **out);

// Fills `out[0..=depth]` with the per-depth lower-bound profile.
//
// # Safety
// `pair` must be a live handle; `out` must hold `depth + 1` doubles.
enum MispolarStatus mispolar_bound_profile(const struct MispolarPair *pair,
                                           uintptr_t depth,
                                           uintptr_t alphabet_cap,
                                           double *out);

// Monte Carlo frame error rate of mismatched polar coding.
//
// `log2_blocklen` is n with block length N = 2^n.
//
// # Safety
// `pair` must be a live handle; out-pointers may be NULL to skip a field.
enum MispolarStatus mispolar_simulate_fer(const struct MispolarPair *pair,
                                          uintptr_t log2_blocklen,
                                          double rate,
                                          uint64_t trials,
                                          uint64_t seed,
                                          double *out_fer,
                                          uint64_t *out_block_errors);

// Library version as a static NUL-terminated string.
const char *mispolar_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MISPOLAR_H */
