use rand::Rng;

use crate::env::{sample_reward, BetaProductPrior};
use crate::error::{Error, Result};
use crate::mdp::{
    softmax_policy, solve_optimal_q, ControlledMarkovProcess, Discount, Mdp, RewardModel,
    Trajectory,
};
use crate::samplers::{run_chain, Chain, ChainKernel, JointSample, Proposal, SamplerConfig};

pub const DEFAULT_CONFIDENCE: f64 = 1.0;

struct QSumKernel<'a> {
    cmp: &'a ControlledMarkovProcess,
    discount: Discount,
    prior: &'a BetaProductPrior,
    traj: &'a Trajectory,
    confidence: f64,
    config: SamplerConfig,
}

impl QSumKernel<'_> {
    fn evaluate(&self, reward: RewardModel) -> Result<JointSample> {
        let mdp = Mdp::new(self.cmp, &reward, self.discount)?;
        let q = solve_optimal_q(&mdp, self.config.q_tol, self.config.q_max_iter)?;
        let q_sum: f64 = self.traj.pairs().map(|(s, a)| q.get(s, a)).sum();
        Ok(JointSample {
            policy: softmax_policy(&q, self.confidence),
            reward,
            eta: self.confidence,
            log_likelihood: self.confidence * q_sum,
            log_prior: 0.0,
            reward_sequence: None,
        })
    }
}

impl ChainKernel for QSumKernel<'_> {
    fn propose<R: Rng + ?Sized>(
        &mut self,
        _current: &JointSample,
        rng: &mut R,
    ) -> Result<Option<Proposal>> {
        let reward = sample_reward(self.prior, rng);
        Ok(Some(Proposal {
            sample: self.evaluate(reward)?,
            log_correction: 0.0,
        }))
    }

    fn log_prior(&self, sample: &JointSample) -> f64 {
        self.prior.ln_density(&sample.reward)
    }
}

/// Metropolis-Hastings over rewards for the posterior
/// `exp(confidence * sum_t Q*(s_t, a_t)) * prior(rho)`, with proposals from
/// the prior and the chain started at `seed_reward`.
///
/// Samples record `confidence * sum_t Q*` as their log-likelihood and the
/// softmax of `Q*` at `confidence` as their policy.
#[allow(clippy::too_many_arguments)]
pub fn policy_walk_chain<R: Rng + ?Sized>(
    cmp: &ControlledMarkovProcess,
    discount: Discount,
    reward_prior: &BetaProductPrior,
    traj: &Trajectory,
    confidence: f64,
    config: &SamplerConfig,
    seed_reward: &RewardModel,
    rng: &mut R,
) -> Result<Chain> {
    config.validate()?;
    cmp.check_trajectory(traj)?;
    cmp.check_reward(seed_reward)?;
    cmp.check_reward(&reward_prior.mean())?;
    if !(confidence >= 0.0 && confidence.is_finite()) {
        return Err(Error::invalid("confidence", format!("{confidence}")));
    }
    let mut kernel = QSumKernel {
        cmp,
        discount,
        prior: reward_prior,
        traj,
        confidence,
        config: *config,
    };
    let init = kernel.evaluate(seed_reward.clone())?;
    run_chain(&mut kernel, init, config, rng)
}
