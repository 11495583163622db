use rand::Rng;

use super::mh::PriorKernel;
use super::{
    run_chain, Chain, ChainKernel, GammaPrior, GibbsAcceptance, JointSample, Proposal,
    SamplerConfig,
};
use crate::env::{sample_reward, BetaProductPrior};
use crate::error::{Error, Result};
use crate::mdp::{ControlledMarkovProcess, Discount, RewardModel, Trajectory};

/// Beta posterior after observing `reward_seq` along `traj`: each visit
/// adds one to `alpha` on success and one to `beta` on failure.
pub fn conjugate_beta_update(
    prior: &BetaProductPrior,
    traj: &Trajectory,
    reward_seq: &[bool],
) -> Result<BetaProductPrior> {
    if reward_seq.len() != traj.len() {
        return Err(Error::Dimension(format!(
            "{} rewards for a trajectory of length {}",
            reward_seq.len(),
            traj.len()
        )));
    }
    traj.check_bounds(prior.n_states(), prior.n_actions())?;
    let mut post = prior.clone();
    for ((s, a), &r) in traj.pairs().zip(reward_seq) {
        if r {
            post.add_counts(s, a, 1.0, 0.0);
        } else {
            post.add_counts(s, a, 0.0, 1.0);
        }
    }
    Ok(post)
}

/// Independent Bernoulli reward at every visited `(state, action)`.
pub fn sample_reward_sequence<R: Rng + ?Sized>(
    reward: &RewardModel,
    traj: &Trajectory,
    rng: &mut R,
) -> Vec<bool> {
    traj.pairs()
        .map(|(s, a)| rng.random::<f64>() < reward.success_prob(s, a))
        .collect()
}

/// `sum_t ln B(r_t | rho(s_t, a_t))`.
fn ln_bernoulli(reward: &RewardModel, traj: &Trajectory, seq: &[bool]) -> f64 {
    traj.pairs()
        .zip(seq)
        .map(|((s, a), &r)| {
            let p = reward.success_prob(s, a);
            if r {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum()
}

struct GibbsKernel<'a> {
    inner: PriorKernel<'a>,
    sequence: Vec<bool>,
    acceptance: GibbsAcceptance,
}

impl ChainKernel for GibbsKernel<'_> {
    fn propose<R: Rng + ?Sized>(
        &mut self,
        current: &JointSample,
        rng: &mut R,
    ) -> Result<Option<Proposal>> {
        let traj = self.inner.traj;
        let posterior = conjugate_beta_update(self.inner.reward_prior, traj, &self.sequence)?;
        let reward = sample_reward(&posterior, rng);
        let eta = self.inner.temp_prior.sample(rng);
        let sample = self.inner.evaluate(reward, eta)?;
        let log_correction = match self.acceptance {
            GibbsAcceptance::Augmented => 0.0,
            GibbsAcceptance::MarginalCorrected => {
                ln_bernoulli(&current.reward, traj, &self.sequence)
                    - ln_bernoulli(&sample.reward, traj, &self.sequence)
            }
        };
        Ok(Some(Proposal {
            sample,
            log_correction,
        }))
    }

    fn log_prior(&self, sample: &JointSample) -> f64 {
        self.inner.log_prior(sample)
    }

    fn finish_step<R: Rng + ?Sized>(&mut self, current: &mut JointSample, rng: &mut R) {
        self.sequence = sample_reward_sequence(&current.reward, self.inner.traj, rng);
        current.reward_sequence = Some(self.sequence.clone());
    }
}

/// Two-stage Gibbs sampler with a Metropolis-Hastings step.
///
/// The chain alternates between the reward model and a latent reward
/// sequence along the demonstration. Given the sequence, `rho~` is drawn from
/// the conjugate Beta update and `eta~` from its prior, then accepted or
/// rejected as in [`mh_chain`](super::mh_chain) (see [`GibbsAcceptance`]).
/// The sequence is then redrawn from the current reward model. Observed
/// rewards stored in the trajectory are ignored.
#[allow(clippy::too_many_arguments)]
pub fn gibbs_chain<R: Rng + ?Sized>(
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
    let inner = PriorKernel {
        cmp,
        discount,
        reward_prior,
        temp_prior,
        traj,
        config: *config,
    };
    // Initial sequence from the prior predictive.
    let predictive = sample_reward(reward_prior, rng);
    let sequence = sample_reward_sequence(&predictive, traj, rng);
    let mut init = inner.draw(rng)?;
    init.reward_sequence = Some(sequence.clone());
    let mut kernel = GibbsKernel {
        inner,
        sequence,
        acceptance: config.gibbs_acceptance,
    };
    run_chain(&mut kernel, init, config, rng)
}
