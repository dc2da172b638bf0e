/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef WELCH_H
#define WELCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define WELCH_FIELD_REAL 0

#define WELCH_FIELD_COMPLEX 1

#define WELCH_SEARCH_GRASSMANNIAN 0

#define WELCH_SEARCH_ETF 1

#define WELCH_SEARCH_POTENTIAL 2

// Result code of every fallible call.
typedef enum WelchStatus {
  WELCH_STATUS_OK = 0,
  WELCH_STATUS_NULL_POINTER = 1,
  WELCH_STATUS_INVALID_ARGUMENT = 2,
  WELCH_STATUS_PARSE = 3,
  WELCH_STATUS_NUMERICAL = 4,
  WELCH_STATUS_BUFFER_TOO_SMALL = 5,
  WELCH_STATUS_PANIC = 6,
} WelchStatus;

// Opaque handle to a vector/functional pair.
typedef struct WelchPair WelchPair;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call into this library on the same
// thread.
const char *welch_last_error(void);

// Parses a pair from JSON text (the format written by the `welch` tool).
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum WelchStatus welch_pair_from_json(const char *json, struct WelchPair **out);

// Builds a pair from interleaved complex rows: `vectors` and `functionals`
// each hold `2·n·dim` doubles. Pass `p = INFINITY` for ℓ∞.
//
// # Safety
// Both arrays must hold `2·n·dim` doubles and `out` must be valid.
enum WelchStatus welch_pair_new(size_t n,
                                size_t dim,
                                double p,
                                uint32_t field_code,
                                const double *vectors,
                                const double *functionals,
                                struct WelchPair **out);

// Pairs each vector with its conjugate functional in ℓ2.
//
// # Safety
// `vectors` must hold `2·n·dim` doubles and `out` must be valid.
enum WelchStatus welch_pair_hilbert(size_t n,
                                    size_t dim,
                                    uint32_t field_code,
                                    const double *vectors,
                                    struct WelchPair **out);

// Releases a pair. Null is ignored.
//
// # Safety
// `pair` must come from this library and not be used afterwards.
void welch_pair_free(struct WelchPair *pair);

// Number of vectors, or 0 for a null handle.
//
// # Safety
// `pair` must be null or a live handle.
size_t welch_pair_count(const struct WelchPair *pair);

// Ambient dimension, or 0 for a null handle.
//
// # Safety
// `pair` must be null or a live handle.
size_t welch_pair_dim(const struct WelchPair *pair);

// Writes the `n × n` Gram matrix into `out` (`2·n·n` doubles).
//
// # Safety
// `out` must hold at least `len` doubles.
enum WelchStatus welch_pair_gram(const struct WelchPair *pair, double *out, size_t len);

// Writes the `dim × dim` frame operator into `out` (`2·dim·dim` doubles).
//
// # Safety
// `out` must hold at least `len` doubles.
enum WelchStatus welch_pair_frame_operator(const struct WelchPair *pair, double *out, size_t len);

// Canonical JSON text of the pair.
//
// # Safety
// `out` must be valid; free the result with [`welch_string_free`].
enum WelchStatus welch_pair_to_json(const struct WelchPair *pair, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void welch_string_free(char *s);

// Full bound report as JSON, with default tolerances. An empty `orders`
// list means order 1 only.
//
// # Safety
// Arrays must hold the stated number of elements; `out` must be valid.
enum WelchStatus welch_report_json(const struct WelchPair *pair,
                                   const size_t *orders,
                                   size_t n_orders,
                                   const double *p_list,
                                   size_t n_p,
                                   char **out);

// Continuous report for a measure/pair document given as JSON text.
//
// # Safety
// As for [`welch_report_json`]; `casf_json` must be NUL-terminated.
enum WelchStatus welch_continuous_report_json(const char *casf_json,
                                              const size_t *orders,
                                              size_t n_orders,
                                              const double *p_list,
                                              size_t n_p,
                                              char **out);

// Largest off-diagonal `|f_j(τ_k)|`.
//
// # Safety
// `out` must be valid.
enum WelchStatus welch_frame_correlation(const struct WelchPair *pair, double *out);

// Right-hand side of the order-m max form for n unit vectors in dimension d.
//
// # Safety
// `out` must be valid.
enum WelchStatus welch_rhs_value(size_t n, size_t d, size_t m, double *out);

// Dimension of the m-th symmetric power of a d-dimensional space.
//
// # Safety
// `out` must be valid.
enum WelchStatus welch_sym_dim(size_t d, size_t m, size_t *out);

// Runs a seeded search. `count` is ignored for the ETF mode (which uses
// `dim²` vectors); `restarts` and `max_iters` of 0 select the defaults.
// On success the best pair, its objective value and whether the search
// converged are written to the out-parameters.
//
// # Safety
// All out-pointers must be valid.
enum WelchStatus welch_search(uint32_t mode,
                              size_t dim,
                              size_t count,
                              double p,
                              uint32_t field_code,
                              uint64_t seed,
                              size_t restarts,
                              size_t max_iters,
                              struct WelchPair **out_pair,
                              double *out_objective,
                              bool *out_converged);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WELCH_H */
