#include <stdio.h>
#include "irl_elicit.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    IrlStatus st = (call);                                                 \
    if (st != IRL_STATUS_OK) {                                             \
      fprintf(stderr, "%s failed (%d): %s\n", #call, (int)st,              \
              irl_last_error_message());                                   \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  IrlEnv *env = NULL;
  IrlReward *reward = NULL;
  IrlPolicy *demo = NULL, *est = NULL;
  IrlTrajectory *traj = NULL;
  IrlChain *chain = NULL;
  double loss = -1.0;

  CHECK(irl_env_random_mdp(8, 2, 7, &env));
  CHECK(irl_reward_sample(env, 1.0, 1.0, 8, &reward));
  CHECK(irl_policy_softmax(env, reward, 0.9, 4.0, &demo));
  CHECK(irl_simulate(env, reward, demo, 100, 9, &traj));
  CHECK(irl_policy_estimate(env, traj, &est));

  IrlSamplerConfig cfg = irl_sampler_config_default();
  cfg.n_samples = 300;
  cfg.burn_in = 100;
  IrlPriors priors = irl_priors_default();
  CHECK(irl_mh_chain(env, 0.9, &priors, traj, &cfg, 10, &chain));
  if (irl_chain_len(chain) != 200) {
    fprintf(stderr, "unexpected chain length %zu\n", irl_chain_len(chain));
    return 1;
  }
  CHECK(irl_l1_loss(env, reward, 0.9, demo, &loss));
  if (!(loss >= 0.0)) {
    fprintf(stderr, "negative loss %f\n", loss);
    return 1;
  }

  IrlEnv *bad = NULL;
  if (irl_env_random_mdp(0, 2, 1, &bad) == IRL_STATUS_OK) {
    fprintf(stderr, "zero-state MDP accepted\n");
    return 1;
  }

  irl_chain_free(chain);
  irl_trajectory_free(traj);
  irl_policy_free(est);
  irl_policy_free(demo);
  irl_reward_free(reward);
  irl_env_free(env);
  printf("ok %.6f\n", loss);
  return 0;
}
