#ifndef BFRATE_H
#define BFRATE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every fallible function.
 */
typedef enum BfrateStatus {
  BFRATE_STATUS_OK = 0,
  BFRATE_STATUS_NULL_POINTER = 1,
  BFRATE_STATUS_INVALID_ARGUMENT = 2,
  BFRATE_STATUS_DOMAIN = 3,
  BFRATE_STATUS_NO_CONVERGENCE = 4,
  BFRATE_STATUS_BUDGET_BACKOFF = 5,
  BFRATE_STATUS_PANIC = 6,
} BfrateStatus;

/**
 * A fading channel: gains, probabilities, noise variance and coherence length.
 */
typedef struct BfrateChannel BfrateChannel;

/**
 * Capacity (nats per use), dispersions and water level at one budget.
 */
typedef struct BfrateDispersion {
  double capacity;
  double v_bf;
  double v_bf_prime;
  double lambda;
  double nocsit_capacity;
  double nocsit_v;
} BfrateDispersion;

/**
 * Bounds on `log M*` in nats and the matching rates.
 */
typedef struct BfrateBounds {
  uint64_t n;
  uint64_t blocks;
  double log_m_lb_st;
  double log_m_lb_lt;
  double log_m_ub_st;
  double log_m_ub_lt;
  double rate_lb_st;
  double rate_lb_lt;
  double rate_ub_st;
  double rate_ub_lt;
  double rate_nocsit;
} BfrateBounds;

/**
 * Monte Carlo settings. Results depend only on these values, not on the
 * number of worker threads.
 */
typedef struct BfrateSimConfig {
  double budget;
  uint64_t blocks;
  double alpha;
  uint64_t trials;
  uint64_t seed;
} BfrateSimConfig;

typedef struct BfrateViolation {
  double empirical_prob;
  uint64_t violations;
  double hoeffding_bound;
  double binomial_sigma;
  double delta_b;
  double lambda_b;
} BfrateViolation;

typedef struct BfrateDensity {
  double empirical_mean_per_use;
  double empirical_var_per_use;
  double analytic_mean;
  double analytic_var;
  double mean_std_error;
  double ks_distance;
} BfrateDensity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `cap`). Returns the full message length plus one,
 * or 0 if the last call on this thread succeeded.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes of writes.
 */
size_t bfrate_last_error_message(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bfrate_version(void);

/**
 * Builds a channel from `len` gains and probabilities. Gains must be
 * distinct and positive; probabilities must sum to 1 within 1e-9.
 *
 * # Safety
 * `gains` and `probs` must point to `len` readable doubles; `out` must be
 * writable. Release the handle with [`bfrate_channel_free`].
 */
enum BfrateStatus bfrate_channel_new(const double *gains,
                                     const double *probs,
                                     size_t len,
                                     double noise_var,
                                     uint32_t n_c,
                                     struct BfrateChannel **out);

/**
 * Builds a named preset: `"paper-rayleigh"` (ten-state discretized
 * Rayleigh) or `"two-state"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum BfrateStatus bfrate_channel_preset(const char *name, struct BfrateChannel **out);

/**
 * Releases a channel. Null is ignored.
 *
 * # Safety
 * `channel` must come from this library and not be used afterwards.
 */
void bfrate_channel_free(struct BfrateChannel *channel);

/**
 * Number of fading states, or 0 for a null handle.
 *
 * # Safety
 * `channel` must be null or a live handle.
 */
size_t bfrate_channel_num_states(const struct BfrateChannel *channel);

/**
 * Water level for `budget`. When `powers` is non-null it receives the
 * per-state powers in ascending gain order; `powers_len` must then equal
 * the number of states.
 *
 * # Safety
 * `channel` must be a live handle, `lambda` writable, and `powers` null or
 * valid for `powers_len` writes.
 */
enum BfrateStatus bfrate_waterfill(const struct BfrateChannel *channel,
                                   double budget,
                                   double *lambda,
                                   double *powers,
                                   size_t powers_len);

/**
 * Capacity and dispersions at `budget`.
 *
 * # Safety
 * `channel` must be a live handle and `out` writable.
 */
enum BfrateStatus bfrate_dispersion(const struct BfrateChannel *channel,
                                    double budget,
                                    struct BfrateDispersion *out);

/**
 * The four bounds at blocklength `n` (a multiple of the coherence length)
 * and error probability `epsilon` in (0, ½).
 *
 * # Safety
 * `channel` must be a live handle and `out` writable.
 */
enum BfrateStatus bfrate_bounds(const struct BfrateChannel *channel,
                                double budget,
                                uint64_t n,
                                double epsilon,
                                double beta,
                                struct BfrateBounds *out);

/**
 * Standard normal CDF.
 *
 * # Safety
 * `out` must be writable.
 */
enum BfrateStatus bfrate_normal_cdf(double x, double *out);

/**
 * Standard normal quantile for `p` in (0, 1).
 *
 * # Safety
 * `out` must be writable.
 */
enum BfrateStatus bfrate_normal_inv_cdf(double p, double *out);

/**
 * Simulates the short-term power controller.
 *
 * # Safety
 * `channel` must be a live handle, `config` readable and `out` writable.
 */
enum BfrateStatus bfrate_simulate_controller(const struct BfrateChannel *channel,
                                             const struct BfrateSimConfig *config,
                                             struct BfrateViolation *out);

/**
 * Simulates the information density sum (at least 100 trials).
 *
 * # Safety
 * `channel` must be a live handle, `config` readable and `out` writable.
 */
enum BfrateStatus bfrate_simulate_density(const struct BfrateChannel *channel,
                                          const struct BfrateSimConfig *config,
                                          struct BfrateDensity *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BFRATE_H */
