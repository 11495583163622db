use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{accept, SamplerConfig};
use crate::error::{Error, Result};
use crate::mdp::{
    greedy_policy, solve_optimal_q, ControlledMarkovProcess, Discount, Mdp, Policy, RewardModel,
    Table,
};

/// One state of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSample {
    pub reward: RewardModel,
    pub eta: f64,
    pub policy: Policy,
    /// Log-likelihood of the demonstration (for the Q-sum chain of the
    /// baselines, the unnormalized score `alpha * sum_t Q*(s_t, a_t)`).
    pub log_likelihood: f64,
    /// Log prior density of `(reward, eta)`, up to a constant.
    pub log_prior: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward_sequence: Option<Vec<bool>>,
}

/// Audit record of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    /// `None` when the proposal could not be evaluated.
    pub proposed_log_likelihood: Option<f64>,
    pub current_log_likelihood: f64,
    pub log_acceptance_ratio: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    /// States after burn-in, thinned.
    pub samples: Vec<JointSample>,
    /// Accepted proposals over all iterations, burn-in included.
    pub acceptance_rate: f64,
    /// Proposals rejected because their Q values did not converge.
    pub solver_failures: usize,
    pub config: SamplerConfig,
    /// One entry per iteration, burn-in included.
    pub steps: Vec<ChainStep>,
}

pub(crate) struct Proposal {
    pub sample: JointSample,
    /// Added to the log-likelihood difference in the acceptance ratio.
    pub log_correction: f64,
}

pub(crate) trait ChainKernel {
    /// `Ok(None)` rejects the iteration without evaluating it.
    fn propose<R: Rng + ?Sized>(
        &mut self,
        current: &JointSample,
        rng: &mut R,
    ) -> Result<Option<Proposal>>;

    fn log_prior(&self, sample: &JointSample) -> f64;

    /// Runs after the accept/reject decision of every iteration.
    fn finish_step<R: Rng + ?Sized>(&mut self, _current: &mut JointSample, _rng: &mut R) {}
}

pub(crate) fn run_chain<K: ChainKernel, R: Rng + ?Sized>(
    kernel: &mut K,
    mut current: JointSample,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<Chain> {
    config.validate()?;
    current.log_prior = kernel.log_prior(&current);
    let mut samples = Vec::with_capacity(config.kept());
    let mut steps = Vec::with_capacity(config.n_samples);
    let mut accepted = 0usize;
    let mut solver_failures = 0usize;

    for k in 1..=config.n_samples {
        let proposal = match kernel.propose(&current, rng) {
            Ok(p) => p,
            Err(Error::NotConverged { .. }) => {
                solver_failures += 1;
                None
            }
            Err(e) => return Err(e),
        };
        let u: f64 = rng.random();
        let step = match proposal {
            Some(Proposal {
                sample: mut candidate,
                log_correction,
            }) => {
                let log_ratio = candidate.log_likelihood - current.log_likelihood + log_correction;
                let take = accept(log_ratio, u);
                let step = ChainStep {
                    proposed_log_likelihood: Some(candidate.log_likelihood),
                    current_log_likelihood: current.log_likelihood,
                    log_acceptance_ratio: log_ratio,
                    accepted: take,
                };
                if take {
                    candidate.log_prior = kernel.log_prior(&candidate);
                    candidate.reward_sequence = current.reward_sequence.take();
                    current = candidate;
                    accepted += 1;
                }
                step
            }
            None => ChainStep {
                proposed_log_likelihood: None,
                current_log_likelihood: current.log_likelihood,
                log_acceptance_ratio: f64::NEG_INFINITY,
                accepted: false,
            },
        };
        steps.push(step);
        kernel.finish_step(&mut current, rng);
        if k > config.burn_in && (k - config.burn_in).is_multiple_of(config.thin) {
            samples.push(current.clone());
        }
    }
    if solver_failures > 0 {
        log::warn!("{solver_failures} proposals rejected after solver non-convergence");
    }
    Ok(Chain {
        samples,
        acceptance_rate: accepted as f64 / config.n_samples as f64,
        solver_failures,
        config: *config,
        steps,
    })
}

/// How a single reward model is extracted from a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointEstimate {
    #[default]
    PosteriorMean,
    /// Sample with the highest unnormalized posterior density.
    Map,
}

/// Entrywise mean of the chain's reward samples.
pub fn posterior_mean_reward(chain: &Chain) -> Result<RewardModel> {
    let first = chain.samples.first().ok_or(Error::EmptyChain)?;
    let (n_states, n_actions) = (first.reward.n_states(), first.reward.n_actions());
    let mut sum = vec![0.0; n_states * n_actions];
    for sample in &chain.samples {
        for (acc, p) in sum.iter_mut().zip(sample.reward.table().as_slice()) {
            *acc += p;
        }
    }
    let n = chain.samples.len() as f64;
    let mean = sum.into_iter().map(|s| (s / n).clamp(0.0, 1.0)).collect();
    RewardModel::new(Table::from_flat(n_states, n_actions, mean)?)
}

/// Reward of the sample maximizing log-likelihood plus log prior; earliest
/// sample on ties.
pub fn map_reward(chain: &Chain) -> Result<RewardModel> {
    chain
        .samples
        .iter()
        .fold(None::<&JointSample>, |best, s| match best {
            Some(b) if b.log_likelihood + b.log_prior >= s.log_likelihood + s.log_prior => Some(b),
            _ => Some(s),
        })
        .map(|s| s.reward.clone())
        .ok_or(Error::EmptyChain)
}

/// Greedy policy for the chain's posterior-mean reward.
pub fn chain_policy(
    chain: &Chain,
    cmp: &ControlledMarkovProcess,
    discount: Discount,
    tie_tol: f64,
) -> Result<Policy> {
    chain_policy_with(chain, cmp, discount, tie_tol, PointEstimate::PosteriorMean)
}

pub fn chain_policy_with(
    chain: &Chain,
    cmp: &ControlledMarkovProcess,
    discount: Discount,
    tie_tol: f64,
    estimate: PointEstimate,
) -> Result<Policy> {
    let reward = match estimate {
        PointEstimate::PosteriorMean => posterior_mean_reward(chain)?,
        PointEstimate::Map => map_reward(chain)?,
    };
    let mdp = Mdp::new(cmp, &reward, discount)?;
    let q = solve_optimal_q(&mdp, chain.config.q_tol, chain.config.q_max_iter)?;
    Ok(greedy_policy(&q, tie_tol))
}
