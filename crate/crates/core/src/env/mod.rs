//! Benchmark environments, reward priors and demonstrations.

mod maze;
mod random_mdp;

pub use maze::{maze_kernel, sample_maze, sample_maze_with, MazeAction, MazeSpec};
pub use random_mdp::{is_communicating, sample_random_mdp, sample_random_mdp_with};

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{
    softmax_policy, solve_optimal_q, ControlledMarkovProcess, Mdp, Policy, RewardModel,
    SolverOptions, Table, Trajectory,
};
use crate::rng::{sample_index, sample_sparse};

/// Default number of rejected draws before a generator gives up.
pub const DEFAULT_RETRY_CAP: usize = 1000;

/// Independent `Beta(alpha[s][a], beta[s][a])` prior on every success
/// probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaProductPrior {
    alpha: Table,
    beta: Table,
}

impl BetaProductPrior {
    pub fn new(alpha: Table, beta: Table) -> Result<Self> {
        if alpha.n_states() != beta.n_states() || alpha.n_actions() != beta.n_actions() {
            return Err(Error::Dimension(
                "alpha and beta tables differ in shape".into(),
            ));
        }
        let bad = alpha
            .as_slice()
            .iter()
            .chain(beta.as_slice())
            .find(|v| !(**v > 0.0 && v.is_finite()));
        if let Some(v) = bad {
            return Err(Error::invalid(
                "beta prior",
                format!("parameter {v} is not positive"),
            ));
        }
        Ok(BetaProductPrior { alpha, beta })
    }

    /// Same `Beta(alpha, beta)` on every entry.
    pub fn uniform(n_states: usize, n_actions: usize, alpha: f64, beta: f64) -> Result<Self> {
        BetaProductPrior::new(
            Table::filled(n_states, n_actions, alpha),
            Table::filled(n_states, n_actions, beta),
        )
    }

    pub fn n_states(&self) -> usize {
        self.alpha.n_states()
    }

    pub fn n_actions(&self) -> usize {
        self.alpha.n_actions()
    }

    pub fn alpha(&self, state: usize, action: usize) -> f64 {
        self.alpha.get(state, action)
    }

    pub fn beta(&self, state: usize, action: usize) -> f64 {
        self.beta.get(state, action)
    }

    pub fn alpha_table(&self) -> &Table {
        &self.alpha
    }

    pub fn beta_table(&self) -> &Table {
        &self.beta
    }

    /// Entrywise prior mean `alpha / (alpha + beta)`.
    pub fn mean(&self) -> RewardModel {
        let values = self
            .alpha
            .as_slice()
            .iter()
            .zip(self.beta.as_slice())
            .map(|(a, b)| a / (a + b))
            .collect();
        RewardModel::new(Table::from_flat(self.n_states(), self.n_actions(), values).unwrap())
            .expect("beta means lie in [0, 1]")
    }

    /// Log density of `reward` under the prior.
    pub fn ln_density(&self, reward: &RewardModel) -> f64 {
        use statrs::function::beta::ln_beta;
        self.alpha
            .as_slice()
            .iter()
            .zip(self.beta.as_slice())
            .zip(reward.table().as_slice())
            .map(|((&a, &b), &p)| {
                let ln_p = if a == 1.0 { 0.0 } else { (a - 1.0) * p.ln() };
                let ln_q = if b == 1.0 {
                    0.0
                } else {
                    (b - 1.0) * (1.0 - p).ln()
                };
                ln_p + ln_q - ln_beta(a, b)
            })
            .sum()
    }

    pub(crate) fn add_counts(&mut self, state: usize, action: usize, success: f64, failure: f64) {
        self.alpha
            .set(state, action, self.alpha.get(state, action) + success);
        self.beta
            .set(state, action, self.beta.get(state, action) + failure);
    }
}

/// Draws every success probability independently from its Beta prior.
pub fn sample_reward<R: Rng + ?Sized>(prior: &BetaProductPrior, rng: &mut R) -> RewardModel {
    let values = prior
        .alpha
        .as_slice()
        .iter()
        .zip(prior.beta.as_slice())
        .map(|(&a, &b)| {
            Beta::new(a, b)
                .expect("prior parameters validated at construction")
                .sample(rng)
                .clamp(0.0, 1.0)
        })
        .collect();
    let table = Table::from_flat(prior.n_states(), prior.n_actions(), values)
        .expect("shape taken from prior");
    RewardModel::new(table).expect("clamped to [0, 1]")
}

/// Softmax policy over the optimal values of `mdp`.
pub fn make_demonstrator(mdp: &Mdp<'_>, eta: f64, tol: f64) -> Result<Policy> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid("inverse temperature", format!("{eta}")));
    }
    let q = solve_optimal_q(mdp, tol, SolverOptions::default().max_iter)?;
    Ok(softmax_policy(&q, eta))
}

/// Rolls out `policy` for `horizon` steps, recording Bernoulli rewards.
pub fn simulate<R: Rng + ?Sized>(
    cmp: &ControlledMarkovProcess,
    reward: &RewardModel,
    policy: &Policy,
    horizon: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    cmp.check_reward(reward)?;
    cmp.check_policy(policy)?;
    let mut states = Vec::with_capacity(horizon);
    let mut actions = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    if horizon == 0 {
        return Trajectory::new(states, actions)?.with_rewards(rewards);
    }
    let mut s = sample_index(cmp.initial_dist(), rng);
    for t in 0..horizon {
        let a = sample_index(policy.row(s), rng);
        let r = rng.random::<f64>() < reward.success_prob(s, a);
        states.push(s);
        actions.push(a);
        rewards.push(r);
        if t + 1 < horizon {
            s = sample_sparse(cmp.successors(s, a), rng);
        }
    }
    Trajectory::new(states, actions)?.with_rewards(rewards)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{l1_loss, Discount};
    use crate::rng::prng;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn beta_one_one_mean() {
        let prior = BetaProductPrior::uniform(1, 1, 1.0, 1.0).unwrap();
        let mut rng = prng(11);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| sample_reward(&prior, &mut rng).success_prob(0, 0))
            .collect();
        let (m, _) = mean_var(&draws);
        assert!((m - 0.5).abs() < 0.01, "mean {m}");
    }

    #[test]
    fn beta_concentrated() {
        let prior = BetaProductPrior::uniform(2, 2, 1e6, 1.0).unwrap();
        let mut rng = prng(12);
        for _ in 0..1000 {
            let r = sample_reward(&prior, &mut rng);
            assert!(r.table().as_slice().iter().all(|p| *p >= 0.99));
        }
    }

    #[test]
    fn beta_two_two_variance() {
        let prior = BetaProductPrior::uniform(1, 1, 2.0, 2.0).unwrap();
        let mut rng = prng(13);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| sample_reward(&prior, &mut rng).success_prob(0, 0))
            .collect();
        let (_, v) = mean_var(&draws);
        assert!((v - 0.05).abs() < 0.005, "variance {v}");
    }

    #[test]
    fn prior_rejects_non_positive() {
        assert!(BetaProductPrior::uniform(1, 1, 0.0, 1.0).is_err());
        assert!(BetaProductPrior::uniform(1, 1, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn ln_density_uniform_is_zero() {
        let prior = BetaProductPrior::uniform(2, 2, 1.0, 1.0).unwrap();
        let r = RewardModel::constant(2, 2, 0.3).unwrap();
        assert!(prior.ln_density(&r).abs() < 1e-12);
        // Beta(2, 2) density at 0.5 is 1.5.
        let prior = BetaProductPrior::uniform(1, 1, 2.0, 2.0).unwrap();
        let r = RewardModel::constant(1, 1, 0.5).unwrap();
        assert!((prior.ln_density(&r) - 1.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn empty_and_deterministic_simulation() {
        let cmp = ControlledMarkovProcess::new(
            vec![
                vec![vec![0.0, 1.0, 0.0]],
                vec![vec![0.0, 0.0, 1.0]],
                vec![vec![1.0, 0.0, 0.0]],
            ],
            vec![0.0, 1.0, 0.0],
        )
        .unwrap();
        let reward = RewardModel::constant(3, 1, 1.0).unwrap();
        let policy = Policy::uniform(3, 1);
        let mut rng = prng(1);
        let empty = simulate(&cmp, &reward, &policy, 0, &mut rng).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.rewards, Some(vec![]));
        let t = simulate(&cmp, &reward, &policy, 7, &mut rng).unwrap();
        assert_eq!(t.states, vec![1, 2, 0, 1, 2, 0, 1]);
        assert_eq!(t.rewards, Some(vec![true; 7]));
    }

    #[test]
    fn two_state_stationary_frequencies() {
        // P = [[0.9, 0.1], [0.3, 0.7]]; stationary distribution solves
        // pi P = pi, i.e. pi_0 * 0.1 = pi_1 * 0.3, giving (0.75, 0.25).
        let cmp = ControlledMarkovProcess::new(
            vec![vec![vec![0.9, 0.1]], vec![vec![0.3, 0.7]]],
            vec![0.5, 0.5],
        )
        .unwrap();
        let reward = RewardModel::constant(2, 1, 0.5).unwrap();
        let mut rng = prng(99);
        let t = simulate(&cmp, &reward, &Policy::uniform(2, 1), 200_000, &mut rng).unwrap();
        let freq0 = t.states.iter().filter(|s| **s == 0).count() as f64 / t.len() as f64;
        assert!((freq0 - 0.75).abs() < 0.02, "freq {freq0}");
    }

    #[test]
    fn simulation_is_reproducible() {
        let mut rng = prng(5);
        let cmp = sample_random_mdp(8, 4, &mut rng).unwrap();
        let reward = sample_reward(
            &BetaProductPrior::uniform(8, 4, 1.0, 1.0).unwrap(),
            &mut rng,
        );
        let policy = Policy::uniform(8, 4);
        let a = simulate(&cmp, &reward, &policy, 300, &mut prng(77)).unwrap();
        let b = simulate(&cmp, &reward, &policy, 300, &mut prng(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn demonstrator_limits() {
        let mut rng = prng(21);
        let cmp = sample_random_mdp(16, 4, &mut rng).unwrap();
        let reward = sample_reward(
            &BetaProductPrior::uniform(16, 4, 1.0, 1.0).unwrap(),
            &mut rng,
        );
        let mdp = Mdp::new(&cmp, &reward, Discount::new(0.95).unwrap()).unwrap();
        let tol = 1e-8;

        let uniform = make_demonstrator(&mdp, 0.0, tol).unwrap();
        assert_eq!(uniform, Policy::uniform(16, 4));
        assert_eq!(
            l1_loss(&mdp, &uniform, tol).unwrap(),
            l1_loss(&mdp, &Policy::uniform(16, 4), tol).unwrap()
        );

        let sharp = make_demonstrator(&mdp, 1e7, tol).unwrap();
        assert!(l1_loss(&mdp, &sharp, tol).unwrap() <= 2.0 * tol * 16.0);

        let losses: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&eta| l1_loss(&mdp, &make_demonstrator(&mdp, eta, tol).unwrap(), tol).unwrap())
            .collect();
        assert!(losses.windows(2).all(|w| w[1] < w[0]), "{losses:?}");
        assert!(make_demonstrator(&mdp, -1.0, tol).is_err());
    }
}
