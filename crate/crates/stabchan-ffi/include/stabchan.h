/* C interface to the stabchan library. */

#ifndef STABCHAN_H
#define STABCHAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status of a C API call. Mirrors the CLI exit-code contract, with an
 * extra code for null arguments.
 */
typedef enum ScStatus {
  SC_STATUS_OK = 0,
  SC_STATUS_VERIFICATION_FAILED = 1,
  SC_STATUS_INVALID_INPUT = 2,
  SC_STATUS_NUMERICAL_FAILURE = 3,
  SC_STATUS_NULL_ARGUMENT = 4,
} ScStatus;

/**
 * Opaque channel (Choi matrix with dimensions).
 */
typedef struct ScChannel ScChannel;

/**
 * Opaque dense complex matrix.
 */
typedef struct ScMatrix ScMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; never freed by the caller.
 */
const char *sc_version(void);

/**
 * Message for the most recent error on this thread, or NULL when the last
 * call succeeded. Valid until the next failing call on the same thread;
 * do not free.
 */
const char *sc_last_error_message(void);

/**
 * Free a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by a `stabchan` function and not freed yet.
 */
void sc_string_free(char *s);

/**
 * Build a matrix from `2 * rows * cols` interleaved doubles
 * (re0, im0, re1, im1, ... in row-major order).
 *
 * # Safety
 * `entries` must point to `2 * rows * cols` readable doubles; `out` must
 * be a valid pointer.
 */
enum ScStatus sc_matrix_new(uintptr_t rows,
                            uintptr_t cols,
                            const double *entries,
                            struct ScMatrix **out);

/**
 * Parse a matrix from its JSON form
 * `{"rows": r, "cols": c, "data": [[re, im], ...]}`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid.
 */
enum ScStatus sc_matrix_from_json(const char *text, struct ScMatrix **out);

/**
 * Serialize a matrix to JSON; free the result with [`sc_string_free`].
 *
 * # Safety
 * `matrix` must be a live handle; `out` must be valid.
 */
enum ScStatus sc_matrix_to_json(const struct ScMatrix *matrix, char **out);

/**
 * # Safety
 * `matrix` must be a live handle.
 */
uintptr_t sc_matrix_rows(const struct ScMatrix *matrix);

/**
 * # Safety
 * `matrix` must be a live handle.
 */
uintptr_t sc_matrix_cols(const struct ScMatrix *matrix);

/**
 * Read one entry.
 *
 * # Safety
 * `matrix` must be a live handle; `re` and `im` must be valid pointers.
 */
enum ScStatus sc_matrix_get(const struct ScMatrix *matrix,
                            uintptr_t row,
                            uintptr_t col,
                            double *re,
                            double *im);

/**
 * # Safety
 * `matrix` must come from this library and not be freed twice.
 */
void sc_matrix_free(struct ScMatrix *matrix);

/**
 * Parse a channel from `{"choi": ..., "d_out": n, "d_in": m}`.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be valid.
 */
enum ScStatus sc_channel_from_json(const char *text, struct ScChannel **out);

/**
 * Serialize a channel to JSON; free with [`sc_string_free`].
 *
 * # Safety
 * `channel` must be a live handle; `out` must be valid.
 */
enum ScStatus sc_channel_to_json(const struct ScChannel *channel, char **out);

/**
 * # Safety
 * `channel` must be a live handle.
 */
uintptr_t sc_channel_d_out(const struct ScChannel *channel);

/**
 * # Safety
 * `channel` must be a live handle.
 */
uintptr_t sc_channel_d_in(const struct ScChannel *channel);

/**
 * # Safety
 * `channel` must come from this library and not be freed twice.
 */
void sc_channel_free(struct ScChannel *channel);

/**
 * Thermal state `exp(-βH)/Z`.
 *
 * # Safety
 * `hamiltonian` must be a live handle; `out` must be valid.
 */
enum ScStatus sc_gibbs(const struct ScMatrix *hamiltonian, double beta, struct ScMatrix **out);

/**
 * Minimum-trace channel fixing `sigma`. Reports the Choi trace
 * (`1/λ_max`), `λ_max` itself, and whether the top eigenvalue was
 * degenerate (making the construction convention-dependent).
 *
 * # Safety
 * `sigma` must be a live handle; out pointers must be valid or NULL for
 * the scalar reports.
 */
enum ScStatus sc_min_channel(const struct ScMatrix *sigma,
                             struct ScChannel **out,
                             double *trace,
                             double *lambda_max,
                             bool *degenerate);

/**
 * Trace-preserving completion channel for `sigma` and completion state
 * `b`. Reports the completion overlap `q`, complete positivity, and the
 * CP-gap eigenvalue (minimum eigenvalue of `σ - (1-λ_max)B`).
 *
 * # Safety
 * `sigma` and `b` must be live handles; out pointers valid or NULL.
 */
enum ScStatus sc_tp_channel(const struct ScMatrix *sigma,
                            const struct ScMatrix *b,
                            struct ScChannel **out,
                            double *overlap_q,
                            bool *cp,
                            double *gap_min_eig);

/**
 * Apply a channel to a state (as a raw matrix; the output trace may differ
 * from one for non-trace-preserving channels).
 *
 * # Safety
 * `channel` and `rho` must be live handles; `out` must be valid.
 */
enum ScStatus sc_channel_apply(const struct ScChannel *channel,
                               const struct ScMatrix *rho,
                               struct ScMatrix **out);

/**
 * `Tr_out[C] = I` within `tol`; the defect is `‖Tr_out[C] - I‖_max`.
 *
 * # Safety
 * `channel` must be a live handle; out pointers valid or NULL.
 */
enum ScStatus sc_channel_is_trace_preserving(const struct ScChannel *channel,
                                             double tolerance,
                                             bool *is_tp,
                                             double *defect);

/**
 * `C ⪰ 0` within `tol`; also reports the minimum eigenvalue.
 *
 * # Safety
 * `channel` must be a live handle; out pointers valid or NULL.
 */
enum ScStatus sc_channel_is_completely_positive(const struct ScChannel *channel,
                                                double tolerance,
                                                bool *is_cp,
                                                double *min_eigenvalue);

/**
 * Fixed point of a trace-preserving channel. With a degenerate fixed
 * space, `unique` is false and the returned state is the projection of the
 * maximally mixed state.
 *
 * # Safety
 * `channel` must be a live handle; `state` must be valid; other out
 * pointers valid or NULL.
 */
enum ScStatus sc_channel_fixed_point(const struct ScChannel *channel,
                                     double tolerance,
                                     struct ScMatrix **state,
                                     bool *unique,
                                     uintptr_t *space_dim);

/**
 * Check the closed-form optimality certificate for `sigma`: both programs
 * evaluate to `1/λ_max` and the gap closes within `tol`.
 *
 * # Safety
 * `sigma` must be a live handle; out pointers valid or NULL.
 */
enum ScStatus sc_verify_sdp(const struct ScMatrix *sigma,
                            double tolerance,
                            double *primal_trace,
                            double *dual_value,
                            double *gap,
                            bool *certified);

/**
 * Independent minimum-trace search (d ≤ 3), deterministic per seed.
 *
 * # Safety
 * `sigma` must be a live handle; `value` must be valid.
 */
enum ScStatus sc_oracle_min_trace(const struct ScMatrix *sigma,
                                  uintptr_t budget,
                                  uint64_t seed,
                                  double *value);

/**
 * Membership of a channel in the stabilizing family of `sigma`. On
 * success, `completion` (when non-NULL) receives the recovered completion
 * state or NULL if the channel is not in the family.
 *
 * # Safety
 * `channel` and `sigma` must be live handles; out pointers valid or NULL.
 */
enum ScStatus sc_is_in_family(const struct ScChannel *channel,
                              const struct ScMatrix *sigma,
                              double tolerance,
                              bool *in_family,
                              struct ScMatrix **completion);

/**
 * Collision channel `ρ ↦ Tr_X[S(ρ_X ⊗ ρ)S†]` from a joint unitary and a
 * bath state.
 *
 * # Safety
 * `s` and `rho_x` must be live handles; `out` must be valid.
 */
enum ScStatus sc_collision_channel(const struct ScMatrix *s,
                                   const struct ScMatrix *rho_x,
                                   uintptr_t d_y,
                                   struct ScChannel **out);

/**
 * The partial-swap unitary `cos θ · I + i sin θ · SWAP` on `d ⊗ d`.
 *
 * # Safety
 * `out` must be valid.
 */
enum ScStatus sc_partial_swap(double theta, uintptr_t d, struct ScMatrix **out);

/**
 * Iterate the completion channel of (`sigma`, `b`) from `rho0` and return
 * the per-step CSV trace (`n,p_n,weight_B,dist_to_sigma`); free it with
 * [`sc_string_free`]. Also reports the final trace distance to `sigma`
 * and whether the run stagnated.
 *
 * # Safety
 * All matrix arguments must be live handles; `csv` must be valid; other
 * out pointers valid or NULL.
 */
enum ScStatus sc_iterate_csv(const struct ScMatrix *sigma,
                             const struct ScMatrix *b,
                             const struct ScMatrix *rho0,
                             uintptr_t steps,
                             char **csv,
                             double *final_dist,
                             bool *stagnant);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STABCHAN_H */
