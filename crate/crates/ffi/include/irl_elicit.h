#ifndef IRL_ELICIT_H
#define IRL_ELICIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum IrlStatus {
  IRL_STATUS_OK = 0,
  IRL_STATUS_NULL_POINTER = 1,
  IRL_STATUS_INVALID_ARGUMENT = 2,
  IRL_STATUS_DIMENSION = 3,
  IRL_STATUS_INDEX_OUT_OF_RANGE = 4,
  IRL_STATUS_NOT_CONVERGED = 5,
  IRL_STATUS_RETRY_CAP_EXCEEDED = 6,
  IRL_STATUS_LINEAR_PROGRAM = 7,
  IRL_STATUS_EMPTY_CHAIN = 8,
  IRL_STATUS_CONFIG = 9,
  IRL_STATUS_FORMAT = 10,
  IRL_STATUS_IO = 11,
  IRL_STATUS_UTF8 = 12,
  IRL_STATUS_PANIC = 13,
} IrlStatus;

/**
 * Posterior samples of a chain.
 */
typedef struct IrlChain IrlChain;

/**
 * Environment dynamics (a controlled Markov process).
 */
typedef struct IrlEnv IrlEnv;

/**
 * Stochastic policy.
 */
typedef struct IrlPolicy IrlPolicy;

/**
 * Bernoulli success probabilities per state-action pair.
 */
typedef struct IrlReward IrlReward;

/**
 * Demonstrated state-action sequence.
 */
typedef struct IrlTrajectory IrlTrajectory;

/**
 * Plain-data sampler settings.
 */
typedef struct IrlSamplerConfig {
  /**
   * Total iterations, burn-in included.
   */
  size_t n_samples;
  size_t burn_in;
  size_t thin;
  double q_tol;
  size_t q_max_iter;
  /**
   * Nonzero selects the marginal-corrected Gibbs acceptance rule.
   */
  int32_t gibbs_marginal_corrected;
} IrlSamplerConfig;

/**
 * Priors shared by the samplers.
 */
typedef struct IrlPriors {
  /**
   * Beta prior on every success probability.
   */
  double alpha;
  double beta;
  /**
   * Gamma prior on the inverse temperature.
   */
  double gamma_shape;
  double gamma_rate;
} IrlPriors;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *irl_last_error_message(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void irl_string_free(char *s);

/**
 * Default sampler settings (10000 iterations, 2000 burn-in).
 */
struct IrlSamplerConfig irl_sampler_config_default(void);

/**
 * Beta(1, 1) rewards and a Gamma(2, 0.5) temperature.
 */
struct IrlPriors irl_priors_default(void);

/**
 * Random communicating MDP with `n_actions` actions per state.
 *
 * # Safety
 * `out` must be a valid pointer to write the handle to.
 */
enum IrlStatus irl_env_random_mdp(size_t n_states,
                                  size_t n_actions,
                                  uint64_t seed,
                                  struct IrlEnv **out);

/**
 * Random maze on a `width` x `height` grid; states are the free cells in
 * row-major order and actions are north, east, south, west.
 *
 * # Safety
 * `out` must be a valid pointer to write the handle to.
 */
enum IrlStatus irl_env_maze(size_t width, size_t height, uint64_t seed, struct IrlEnv **out);

/**
 * Environment from its JSON form (see [`irl_env_to_json`]).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum IrlStatus irl_env_from_json(const char *json, struct IrlEnv **out);

/**
 * JSON object with `n_states`, `n_actions`, `transitions[s][a][s']` and
 * `initial_dist`. Free the string with [`irl_string_free`].
 *
 * # Safety
 * `env` must be a live handle and `out` a valid pointer.
 */
enum IrlStatus irl_env_to_json(const struct IrlEnv *env, char **out);

/**
 * # Safety
 * `env` must be a live handle or null.
 */
size_t irl_env_n_states(const struct IrlEnv *env);

/**
 * # Safety
 * `env` must be a live handle or null.
 */
size_t irl_env_n_actions(const struct IrlEnv *env);

/**
 * # Safety
 * `env` must come from this library and not have been freed, or be null.
 */
void irl_env_free(struct IrlEnv *env);

/**
 * Reward model from `n_states * n_actions` probabilities.
 *
 * # Safety
 * `values` must point to `n_states * n_actions` doubles; `out` must be valid.
 */
enum IrlStatus irl_reward_from_array(size_t n_states,
                                     size_t n_actions,
                                     const double *values,
                                     struct IrlReward **out);

/**
 * Reward model drawn from a Beta(`alpha`, `beta`) product prior.
 *
 * # Safety
 * `env` must be a live handle and `out` a valid pointer.
 */
enum IrlStatus irl_reward_sample(const struct IrlEnv *env,
                                 double alpha,
                                 double beta,
                                 uint64_t seed,
                                 struct IrlReward **out);

/**
 * Copies the success probabilities into `out` (`len` must equal
 * `n_states * n_actions`).
 *
 * # Safety
 * `reward` must be a live handle and `out` must hold `len` doubles.
 */
enum IrlStatus irl_reward_values(const struct IrlReward *reward, double *out, size_t len);

/**
 * # Safety
 * `reward` must come from this library and not have been freed, or be null.
 */
void irl_reward_free(struct IrlReward *reward);

/**
 * Softmax policy over the optimal Q values at inverse temperature `eta`.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum IrlStatus irl_policy_softmax(const struct IrlEnv *env,
                                  const struct IrlReward *reward,
                                  double gamma,
                                  double eta,
                                  struct IrlPolicy **out);

/**
 * Greedy policy of the optimal Q values, uniform over actions within
 * `tie_tol` of the best.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum IrlStatus irl_policy_greedy(const struct IrlEnv *env,
                                 const struct IrlReward *reward,
                                 double gamma,
                                 double tie_tol,
                                 struct IrlPolicy **out);

/**
 * Maximum-likelihood policy estimate from a demonstration.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum IrlStatus irl_policy_estimate(const struct IrlEnv *env,
                                   const struct IrlTrajectory *traj,
                                   struct IrlPolicy **out);

/**
 * Copies the action probabilities into `out` (`len` must equal
 * `n_states * n_actions`).
 *
 * # Safety
 * `policy` must be a live handle and `out` must hold `len` doubles.
 */
enum IrlStatus irl_policy_values(const struct IrlPolicy *policy, double *out, size_t len);

/**
 * # Safety
 * `policy` must come from this library and not have been freed, or be null.
 */
void irl_policy_free(struct IrlPolicy *policy);

/**
 * Value loss `sum_s V*(s) - V^pi(s)` of `policy` under `reward`.
 *
 * # Safety
 * Handles must be live and `loss` valid.
 */
enum IrlStatus irl_l1_loss(const struct IrlEnv *env,
                           const struct IrlReward *reward,
                           double gamma,
                           const struct IrlPolicy *policy,
                           double *loss);

/**
 * Discounted state occupancy of `policy` from the initial distribution;
 * `len` must equal the state count.
 *
 * # Safety
 * Handles must be live and `out` must hold `len` doubles.
 */
enum IrlStatus irl_state_occupancy(const struct IrlEnv *env,
                                   const struct IrlPolicy *policy,
                                   double gamma,
                                   double *out,
                                   size_t len);

/**
 * State reward recovered by the linear program, broadcast over actions.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum IrlStatus irl_lp_reward(const struct IrlEnv *env,
                             const struct IrlPolicy *policy,
                             double gamma,
                             double penalty,
                             double r_max,
                             struct IrlReward **out);

/**
 * Rolls out `policy` for `horizon` steps.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum IrlStatus irl_simulate(const struct IrlEnv *env,
                            const struct IrlReward *reward,
                            const struct IrlPolicy *policy,
                            size_t horizon,
                            uint64_t seed,
                            struct IrlTrajectory **out);

/**
 * Trajectory from parallel state and action arrays of length `len`.
 *
 * # Safety
 * `states` and `actions` must hold `len` entries; `out` must be valid.
 */
enum IrlStatus irl_trajectory_from_arrays(const size_t *states,
                                          const size_t *actions,
                                          size_t len,
                                          struct IrlTrajectory **out);

/**
 * # Safety
 * `traj` must be a live handle or null.
 */
size_t irl_trajectory_len(const struct IrlTrajectory *traj);

/**
 * Copies states and actions into arrays of length `len` (the trajectory
 * length).
 *
 * # Safety
 * `traj` must be live; `states` and `actions` must hold `len` entries.
 */
enum IrlStatus irl_trajectory_copy(const struct IrlTrajectory *traj,
                                   size_t *states,
                                   size_t *actions,
                                   size_t len);

/**
 * # Safety
 * `traj` must come from this library and not have been freed, or be null.
 */
void irl_trajectory_free(struct IrlTrajectory *traj);

/**
 * Metropolis-Hastings chain over rewards and inverse temperature.
 *
 * # Safety
 * Handles and pointers must be live and `out` valid.
 */
enum IrlStatus irl_mh_chain(const struct IrlEnv *env,
                            double gamma,
                            const struct IrlPriors *priors,
                            const struct IrlTrajectory *traj,
                            const struct IrlSamplerConfig *config,
                            uint64_t seed,
                            struct IrlChain **out);

/**
 * Gibbs sampler with latent reward sequences.
 *
 * # Safety
 * Handles and pointers must be live and `out` valid.
 */
enum IrlStatus irl_gibbs_chain(const struct IrlEnv *env,
                               double gamma,
                               const struct IrlPriors *priors,
                               const struct IrlTrajectory *traj,
                               const struct IrlSamplerConfig *config,
                               uint64_t seed,
                               struct IrlChain **out);

/**
 * Number of kept samples.
 *
 * # Safety
 * `chain` must be a live handle or null.
 */
size_t irl_chain_len(const struct IrlChain *chain);

/**
 * Fraction of accepted proposals, burn-in included; NaN for null.
 *
 * # Safety
 * `chain` must be a live handle or null.
 */
double irl_chain_acceptance_rate(const struct IrlChain *chain);

/**
 * Posterior-mean reward of the chain.
 *
 * # Safety
 * `chain` must be a live handle and `out` valid.
 */
enum IrlStatus irl_chain_mean_reward(const struct IrlChain *chain, struct IrlReward **out);

/**
 * Greedy policy of the chain's posterior-mean reward.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum IrlStatus irl_chain_policy(const struct IrlChain *chain,
                                const struct IrlEnv *env,
                                double gamma,
                                double tie_tol,
                                struct IrlPolicy **out);

/**
 * Chain as JSON (samples, acceptance rate, config and per-iteration audit
 * trail). Free the string with [`irl_string_free`].
 *
 * # Safety
 * `chain` must be a live handle and `out` valid.
 */
enum IrlStatus irl_chain_to_json(const struct IrlChain *chain, char **out);

/**
 * # Safety
 * `chain` must come from this library and not have been freed, or be null.
 */
void irl_chain_free(struct IrlChain *chain);

/**
 * Runs an experiment batch described by `settings` (the `key = value`
 * config-file format) and writes results to `out_path`, with the aggregate
 * next to it. `n_errors` receives the number of error records and may be
 * null.
 *
 * # Safety
 * Strings must be NUL-terminated; `n_errors` must be valid or null.
 */
enum IrlStatus irl_run_batch(const char *settings, const char *out_path, size_t *n_errors);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IRL_ELICIT_H */
