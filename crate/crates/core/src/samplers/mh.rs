use rand::Rng;

use super::{
    run_chain, softmax_fit, Chain, ChainKernel, GammaPrior, JointSample, Proposal, SamplerConfig,
};
use crate::env::{sample_reward, BetaProductPrior};
use crate::error::Result;
use crate::mdp::{ControlledMarkovProcess, Discount, Trajectory};

pub(super) struct PriorKernel<'a> {
    pub cmp: &'a ControlledMarkovProcess,
    pub discount: Discount,
    pub reward_prior: &'a BetaProductPrior,
    pub temp_prior: GammaPrior,
    pub traj: &'a Trajectory,
    pub config: SamplerConfig,
}

impl PriorKernel<'_> {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<JointSample> {
        let reward = sample_reward(self.reward_prior, rng);
        let eta = self.temp_prior.sample(rng);
        self.evaluate(reward, eta)
    }

    pub fn evaluate(&self, reward: crate::mdp::RewardModel, eta: f64) -> Result<JointSample> {
        let (policy, log_likelihood) = softmax_fit(
            self.cmp,
            self.discount,
            &reward,
            eta,
            self.traj,
            &self.config,
        )?;
        Ok(JointSample {
            reward,
            eta,
            policy,
            log_likelihood,
            log_prior: 0.0,
            reward_sequence: None,
        })
    }
}

impl ChainKernel for PriorKernel<'_> {
    fn propose<R: Rng + ?Sized>(
        &mut self,
        _current: &JointSample,
        rng: &mut R,
    ) -> Result<Option<Proposal>> {
        Ok(Some(Proposal {
            sample: self.draw(rng)?,
            log_correction: 0.0,
        }))
    }

    fn log_prior(&self, sample: &JointSample) -> f64 {
        self.reward_prior.ln_density(&sample.reward) + self.temp_prior.ln_density(sample.eta)
    }
}

/// Metropolis-Hastings with independent proposals from the prior.
///
/// Each iteration draws `rho~` from the Beta-product prior and `eta~` from
/// the gamma prior, sets the policy to the softmax of `Q*_{rho~}` at `eta~`,
/// and accepts with probability `min(1, exp(ll~ - ll))`. The prior terms
/// cancel against the proposal density, leaving the likelihood ratio.
/// Proposals whose Q values fail to converge are rejected and counted.
#[allow(clippy::too_many_arguments)]
pub fn mh_chain<R: Rng + ?Sized>(
    cmp: &ControlledMarkovProcess,
    discount: Discount,
    reward_prior: &BetaProductPrior,
    temp_prior: GammaPrior,
    traj: &Trajectory,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<Chain> {
    config.validate()?;
    cmp.check_trajectory(traj)?;
    cmp.check_reward(&reward_prior.mean())?;
    temp_prior.validate()?;
    let mut kernel = PriorKernel {
        cmp,
        discount,
        reward_prior,
        temp_prior,
        traj,
        config: *config,
    };
    let init = kernel.draw(rng)?;
    run_chain(&mut kernel, init, config, rng)
}
