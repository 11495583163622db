use serde::{Deserialize, Serialize};

use super::occupancy::{discounted_state_occupancy, OccupancyVector};
use crate::error::{Error, Result};
use crate::mdp::{
    greedy_policy, l1_loss, policy_value, solve_optimal_q, ControlledMarkovProcess, Discount, Mdp,
    Policy, RewardModel, SolverOptions, Table, VTable,
};

pub const DEFAULT_ACCURACY: f64 = 1e-3;
/// Round cap for desk-scale runs; the full schedule at the default accuracy
/// asks for millions of rounds.
pub const DEFAULT_MAX_ROUNDS: usize = 2_000;

/// A distribution over stationary policies: one is drawn at the start of an
/// episode and followed throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedPolicy {
    pub policies: Vec<Policy>,
    pub weights: Vec<f64>,
}

impl MixedPolicy {
    pub fn single(policy: Policy) -> Self {
        MixedPolicy {
            policies: vec![policy],
            weights: vec![1.0],
        }
    }

    /// Uniform mixture over `policies`, merging identical entries.
    pub fn uniform(policies: Vec<Policy>) -> Self {
        let total = policies.len() as f64;
        let mut distinct: Vec<Policy> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for p in policies {
            match distinct.iter().position(|q| *q == p) {
                Some(i) => counts[i] += 1,
                None => {
                    distinct.push(p);
                    counts.push(1);
                }
            }
        }
        MixedPolicy {
            policies: distinct,
            weights: counts.iter().map(|&c| c as f64 / total).collect(),
        }
    }

    /// `sum_i w_i V^{pi_i}`.
    pub fn value(&self, mdp: &Mdp<'_>, tol: f64) -> Result<VTable> {
        let mut total = vec![0.0; mdp.n_states()];
        for (p, w) in self.policies.iter().zip(&self.weights) {
            let v = policy_value(mdp, p, tol)?;
            for (t, x) in total.iter_mut().zip(v.as_slice()) {
                *t += w * x;
            }
        }
        Ok(VTable(total))
    }

    /// Value loss of the mixture, `sum_i w_i L(pi_i)`.
    pub fn l1_loss(&self, mdp: &Mdp<'_>, tol: f64) -> Result<f64> {
        self.policies
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| Ok(w * l1_loss(mdp, p, tol)?))
            .sum()
    }
}

/// Round count and multiplicative learning rate for `n_features` at
/// `accuracy`: `N = ceil(4 ln(k) / accuracy^2)` and
/// `beta = 1 / (1 + sqrt(2 ln(k) / N))`.
pub fn mwal_schedule(accuracy: f64, n_features: usize) -> (usize, f64) {
    let ln_k = (n_features as f64).ln();
    let rounds = ((4.0 / (accuracy * accuracy)) * ln_k).ceil().max(1.0) as usize;
    (rounds, mwal_learning_rate(rounds, n_features))
}

fn mwal_learning_rate(rounds: usize, n_features: usize) -> f64 {
    let ln_k = (n_features as f64).ln();
    1.0 / (1.0 + (2.0 * ln_k / rounds as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MwalOptions {
    /// Caps the scheduled round count when set.
    pub max_rounds: Option<usize>,
    pub solver: SolverOptions,
    pub tie_tol: f64,
}

impl Default for MwalOptions {
    fn default() -> Self {
        MwalOptions {
            max_rounds: Some(DEFAULT_MAX_ROUNDS),
            solver: SolverOptions::default(),
            tie_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwalResult {
    pub mixture: MixedPolicy,
    /// Rounds actually played.
    pub rounds: usize,
    /// Rounds the schedule asked for before capping.
    pub scheduled_rounds: usize,
    pub learning_rate: f64,
    /// Feature weights used in each round; every entry lies on the simplex.
    pub weight_trace: Vec<Vec<f64>>,
    /// Normalized feature expectation of the mixture.
    pub feature_expectation: Vec<f64>,
}

impl MwalResult {
    /// `min_i (mu_mix(i) - mu_demo(i))` over normalized state features: the
    /// worst-case advantage of the mixture over the demonstration for any
    /// reward on the feature simplex.
    pub fn slack(&self, demo_normalized: &[f64]) -> f64 {
        self.feature_expectation
            .iter()
            .zip(demo_normalized)
            .map(|(m, d)| m - d)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Game-theoretic apprenticeship learning with one indicator feature per
/// state.
///
/// Features are discounted state occupancies scaled by `1 - gamma`. Each
/// round best-responds to the current feature weights `w` (reward
/// `rho(s, a) = w(s)`), then shrinks each weight by
/// `beta^((mu_pi(i) - mu_demo(i) + 2) / 4)` and renormalizes. The result is
/// the uniform mixture of the per-round policies.
pub fn mwal(
    cmp: &ControlledMarkovProcess,
    discount: Discount,
    demo_occupancy: &OccupancyVector,
    accuracy: f64,
    options: &MwalOptions,
) -> Result<MwalResult> {
    if !(accuracy > 0.0 && accuracy.is_finite()) {
        return Err(Error::invalid("MWAL accuracy", format!("{accuracy}")));
    }
    let n = cmp.n_states();
    if demo_occupancy.as_slice().len() != n {
        return Err(Error::Dimension(format!(
            "demonstrator occupancy has {} entries, expected {n}",
            demo_occupancy.as_slice().len()
        )));
    }
    let demo = demo_occupancy.normalized(discount);
    let (scheduled_rounds, _) = mwal_schedule(accuracy, n);
    let rounds = options
        .max_rounds
        .map_or(scheduled_rounds, |cap| scheduled_rounds.min(cap.max(1)));
    let beta = mwal_learning_rate(rounds, n);
    let ln_beta = beta.ln();

    let mut weights = vec![1.0 / n as f64; n];
    let mut policies = Vec::with_capacity(rounds);
    let mut weight_trace = Vec::with_capacity(rounds);
    let mut feature_sum = vec![0.0; n];
    for _ in 0..rounds {
        let mut table = Table::filled(n, cmp.n_actions(), 0.0);
        for (s, &w) in weights.iter().enumerate() {
            for a in 0..cmp.n_actions() {
                table.set(s, a, w.clamp(0.0, 1.0));
            }
        }
        let reward = RewardModel::new(table)?;
        let mdp = Mdp::new(cmp, &reward, discount)?;
        let q = solve_optimal_q(&mdp, options.solver.tol, options.solver.max_iter)?;
        let policy = greedy_policy(&q, options.tie_tol);
        let features = discounted_state_occupancy(cmp, &policy, discount)?.normalized(discount);

        weight_trace.push(weights.clone());
        for (i, w) in weights.iter_mut().enumerate() {
            let payoff = (features[i] - demo[i] + 2.0) / 4.0;
            *w *= (ln_beta * payoff).exp();
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);

        for (acc, f) in feature_sum.iter_mut().zip(&features) {
            *acc += f;
        }
        policies.push(policy);
    }
    let feature_expectation = feature_sum.iter().map(|f| f / rounds as f64).collect();
    Ok(MwalResult {
        mixture: MixedPolicy::uniform(policies),
        rounds,
        scheduled_rounds,
        learning_rate: beta,
        weight_trace,
        feature_expectation,
    })
}
