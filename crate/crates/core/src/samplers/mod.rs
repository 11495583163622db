//! Posterior sampling of reward functions and inverse temperatures from a
//! single demonstration.
//!
//! Both samplers target the joint posterior of a reward model `rho` and an
//! inverse temperature `eta` under the model
//!
//! ```text
//! rho ~ BetaProduct(alpha, beta),   eta ~ Gamma(shape, rate),
//! a_t | s_t ~ softmax(eta * Q*_rho(s_t, .)).
//! ```
//!
//! [`mh_chain`] proposes `(rho, eta)` from the prior, so the acceptance ratio
//! reduces to a likelihood ratio. [`gibbs_chain`] additionally carries a
//! latent reward sequence and proposes `rho` from its conjugate update.

mod chain;
mod gibbs;
mod mh;

pub use chain::{
    chain_policy, chain_policy_with, map_reward, posterior_mean_reward, Chain, ChainStep,
    JointSample, PointEstimate,
};
pub(crate) use chain::{run_chain, ChainKernel, Proposal};
pub use gibbs::{conjugate_beta_update, gibbs_chain, sample_reward_sequence};
pub use mh::mh_chain;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{
    softmax_policy, solve_optimal_q, trajectory_log_likelihood, ControlledMarkovProcess, Discount,
    Mdp, Policy, RewardModel, Trajectory,
};

/// `Gamma(shape, rate)` prior on the inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl Default for GammaPrior {
    fn default() -> Self {
        GammaPrior {
            shape: 2.0,
            rate: 0.5,
        }
    }
}

impl GammaPrior {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        let prior = GammaPrior { shape, rate };
        prior.validate()?;
        Ok(prior)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shape > 0.0 && self.rate > 0.0 && self.shape.is_finite() && self.rate.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(
                "gamma prior",
                format!(
                    "shape {} and rate {} must be positive",
                    self.shape, self.rate
                ),
            ))
        }
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Gamma::new(self.shape, 1.0 / self.rate)
            .expect("validated gamma parameters")
            .sample(rng)
    }

    pub fn ln_density(&self, eta: f64) -> f64 {
        use statrs::function::gamma::ln_gamma;
        if eta <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape * self.rate.ln() - ln_gamma(self.shape) + (self.shape - 1.0) * eta.ln()
            - self.rate * eta
    }
}

/// How the Gibbs sampler accepts reward proposals drawn from the conjugate
/// update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GibbsAcceptance {
    /// Likelihood ratio only. The conjugate proposal is the exact
    /// conditional of `rho` given the latent rewards, so this leaves the
    /// joint posterior over `(rho, eta, rewards)` invariant.
    #[default]
    Augmented,
    /// Likelihood ratio times `B(r | rho) / B(r | rho~)`, treating the
    /// conjugate draw as an independence proposal for the marginal
    /// posterior of `rho`.
    MarginalCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Total iterations, burn-in included.
    pub n_samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Value-iteration tolerance for every proposed reward.
    pub q_tol: f64,
    pub q_max_iter: usize,
    #[serde(default)]
    pub gibbs_acceptance: GibbsAcceptance,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_samples: 10_000,
            burn_in: 2_000,
            thin: 1,
            q_tol: 1e-6,
            q_max_iter: 100_000,
            gibbs_acceptance: GibbsAcceptance::Augmented,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.n_samples {
            return Err(Error::invalid(
                "sampler config",
                format!(
                    "burn-in {} not below sample count {}",
                    self.burn_in, self.n_samples
                ),
            ));
        }
        if self.thin == 0 {
            return Err(Error::invalid(
                "sampler config",
                "thinning must be at least 1",
            ));
        }
        if !(self.q_tol > 0.0) {
            return Err(Error::invalid(
                "sampler config",
                "solver tolerance must be positive",
            ));
        }
        Ok(())
    }

    /// Number of samples a chain keeps after burn-in and thinning.
    pub fn kept(&self) -> usize {
        (self.n_samples - self.burn_in) / self.thin
    }
}

/// Softmax policy of `reward` at `eta` and the demonstration's log-likelihood
/// under it.
pub(crate) fn softmax_fit(
    cmp: &ControlledMarkovProcess,
    discount: Discount,
    reward: &RewardModel,
    eta: f64,
    traj: &Trajectory,
    config: &SamplerConfig,
) -> Result<(Policy, f64)> {
    let mdp = Mdp::new(cmp, reward, discount)?;
    let q = solve_optimal_q(&mdp, config.q_tol, config.q_max_iter)?;
    let policy = softmax_policy(&q, eta);
    let ll = trajectory_log_likelihood(&policy, traj)?;
    Ok((policy, ll))
}

/// Metropolis acceptance: always accept when the log ratio is non-negative,
/// otherwise accept when `u < exp(log_ratio)`. A NaN ratio (both states of
/// zero likelihood) is rejected.
pub(crate) fn accept(log_ratio: f64, u: f64) -> bool {
    if log_ratio >= 0.0 {
        true
    } else if log_ratio.is_nan() {
        false
    } else {
        u < log_ratio.exp()
    }
}
