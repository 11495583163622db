//! Reference computations shared by the integration tests. Everything here
//! is computed independently of the library's solvers: dense linear solves
//! and brute-force enumeration.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Gamma};

use irl_elicit::env::simulate;
use irl_elicit::mdp::{
    softmax_policy, solve_optimal_q, ControlledMarkovProcess, Discount, Mdp, RewardModel,
    Trajectory,
};
use irl_elicit::rng::prng;
use irl_elicit::samplers::{Chain, GammaPrior, JointSample};

/// `V^pi` from the dense system `(I - gamma P_pi) V = r_pi`.
pub fn exact_policy_v(
    cmp: &ControlledMarkovProcess,
    reward: &RewardModel,
    gamma: f64,
    policy: &[Vec<f64>],
) -> Vec<f64> {
    let n = cmp.n_states();
    let mut system = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for s in 0..n {
        for (a, &p) in policy[s].iter().enumerate() {
            rhs[s] += p * reward.success_prob(s, a);
            for (next, &t) in cmp.row(s, a).iter().enumerate() {
                system[(s, next)] -= gamma * p * t;
            }
        }
    }
    let v = system.lu().solve(&rhs).expect("I - gamma P is invertible");
    v.iter().copied().collect()
}

/// `Q(s, a) = r(s, a) + gamma sum_s' T(s'|s,a) V(s')`.
pub fn q_from_v(
    cmp: &ControlledMarkovProcess,
    reward: &RewardModel,
    gamma: f64,
    v: &[f64],
) -> Vec<Vec<f64>> {
    (0..cmp.n_states())
        .map(|s| {
            (0..cmp.n_actions())
                .map(|a| {
                    let future: f64 = cmp.row(s, a).iter().zip(v).map(|(t, x)| t * x).sum();
                    reward.success_prob(s, a) + gamma * future
                })
                .collect()
        })
        .collect()
}

fn one_hot(actions: &[usize], n_actions: usize) -> Vec<Vec<f64>> {
    actions
        .iter()
        .map(|&a| {
            (0..n_actions)
                .map(|b| f64::from(u8::from(a == b)))
                .collect()
        })
        .collect()
}

/// Optimal Q by Howard policy iteration with exact evaluation. Improvement
/// only switches actions that gain more than `1e-12`, so it terminates.
pub fn policy_iteration_q(
    cmp: &ControlledMarkovProcess,
    reward: &RewardModel,
    gamma: f64,
) -> Vec<Vec<f64>> {
    let mut actions = vec![0usize; cmp.n_states()];
    loop {
        let v = exact_policy_v(cmp, reward, gamma, &one_hot(&actions, cmp.n_actions()));
        let q = q_from_v(cmp, reward, gamma, &v);
        let mut changed = false;
        for (s, row) in q.iter().enumerate() {
            let (best, &value) = row
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.total_cmp(y.1))
                .unwrap();
            if value > row[actions[s]] + 1e-12 {
                actions[s] = best;
                changed = true;
            }
        }
        if !changed {
            return q;
        }
    }
}

pub fn sup_distance(a: &[Vec<f64>], b: &[f64]) -> f64 {
    a.iter()
        .flatten()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `sum_t ln softmax(eta Q)(a_t | s_t)`.
pub fn softmax_log_likelihood(q: &[Vec<f64>], eta: f64, traj: &Trajectory) -> f64 {
    traj.pairs()
        .map(|(s, a)| eta * q[s][a] - log_sum_exp(q[s].iter().map(|x| eta * x)))
        .sum()
}

/// Bins per reward entry in the enumeration oracle.
pub const GRID: usize = 9;
/// Inverse-temperature quadrature points.
pub const ETA_POINTS: usize = 20;
/// Gamma `(shape, rate)` prior on the inverse temperature of the oracle
/// problem. With the library default `(2, 0.5)` fewer than one in ten prior
/// proposals is accepted, and 10^4 iterations hold only a few hundred
/// effective samples.
pub const ORACLE_TEMP_PRIOR: (f64, f64) = (2.0, 2.0);

/// The 2-state, 2-action problem the samplers are checked against, with a
/// demonstration of length 50 from a softmax demonstrator.
pub struct OracleProblem {
    pub cmp: ControlledMarkovProcess,
    pub discount: Discount,
    pub traj: Trajectory,
}

impl OracleProblem {
    pub fn new() -> Self {
        Self::build(
            vec![
                vec![vec![0.9, 0.1], vec![0.2, 0.8]],
                vec![vec![0.7, 0.3], vec![0.1, 0.9]],
            ],
            vec![vec![0.8, 0.3], vec![0.2, 0.6]],
            2.0,
            2024,
        )
    }

    pub fn build(
        transitions: Vec<Vec<Vec<f64>>>,
        truth: Vec<Vec<f64>>,
        eta: f64,
        seed: u64,
    ) -> Self {
        let cmp = ControlledMarkovProcess::new(transitions, vec![0.5, 0.5]).unwrap();
        let discount = Discount::new(0.9).unwrap();
        let truth = RewardModel::from_rows(truth).unwrap();
        let mdp = Mdp::new(&cmp, &truth, discount).unwrap();
        let q = solve_optimal_q(&mdp, 1e-10, 100_000).unwrap();
        let demo = softmax_policy(&q, eta);
        let traj = simulate(&cmp, &truth, &demo, 50, &mut prng(seed)).unwrap();
        OracleProblem {
            cmp,
            discount,
            traj,
        }
    }

    pub fn temp_prior() -> GammaPrior {
        GammaPrior::new(ORACLE_TEMP_PRIOR.0, ORACLE_TEMP_PRIOR.1).unwrap()
    }

    /// Softmax posterior under [`ORACLE_TEMP_PRIOR`].
    pub fn enumerate_default(&self) -> Enumerated {
        self.enumerate_softmax(ORACLE_TEMP_PRIOR.0, ORACLE_TEMP_PRIOR.1)
    }

    /// Midpoint of bin `i` of `[0, 1]`.
    pub fn grid_value(i: usize) -> f64 {
        (i as f64 + 0.5) / GRID as f64
    }

    pub fn bin(p: f64) -> usize {
        ((p * GRID as f64) as usize).min(GRID - 1)
    }

    /// Rewards of every grid configuration, entries in row-major order.
    fn configurations() -> impl Iterator<Item = [usize; 4]> {
        (0..GRID.pow(4)).map(|mut k| {
            let mut idx = [0; 4];
            for slot in idx.iter_mut() {
                *slot = k % GRID;
                k /= GRID;
            }
            idx
        })
    }

    fn q_star(&self, idx: [usize; 4]) -> Vec<Vec<f64>> {
        let rows = vec![
            vec![Self::grid_value(idx[0]), Self::grid_value(idx[1])],
            vec![Self::grid_value(idx[2]), Self::grid_value(idx[3])],
        ];
        let reward = RewardModel::from_rows(rows).unwrap();
        policy_iteration_q(&self.cmp, &reward, self.discount.get())
    }

    /// Posterior over the grid for a uniform reward prior and an
    /// unnormalized log-likelihood `score(Q*)`.
    pub fn enumerate(&self, score: impl Fn(&[Vec<f64>]) -> f64) -> Enumerated {
        let configs: Vec<[usize; 4]> = Self::configurations().collect();
        let log_w: Vec<f64> = configs.iter().map(|&c| score(&self.q_star(c))).collect();
        let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut marginals = [[0.0; GRID]; 4];
        for (c, wi) in configs.iter().zip(&w) {
            for (entry, &i) in c.iter().enumerate() {
                marginals[entry][i] += wi / total;
            }
        }
        Enumerated { marginals }
    }

    /// Posterior of the softmax model, the inverse temperature integrated
    /// over equal-mass quantile midpoints of its gamma prior.
    pub fn enumerate_softmax(&self, shape: f64, rate: f64) -> Enumerated {
        let prior = Gamma::new(shape, rate).unwrap();
        let etas: Vec<f64> = (0..ETA_POINTS)
            .map(|j| prior.inverse_cdf((j as f64 + 0.5) / ETA_POINTS as f64))
            .collect();
        self.enumerate(|q| {
            log_sum_exp(
                etas.iter()
                    .map(|&eta| softmax_log_likelihood(q, eta, &self.traj)),
            )
        })
    }

    /// Posterior of the Q-sum score `alpha sum_t Q*(s_t, a_t)`.
    pub fn enumerate_q_sum(&self, alpha: f64) -> Enumerated {
        self.enumerate(|q| alpha * self.traj.pairs().map(|(s, a)| q[s][a]).sum::<f64>())
    }
}

pub struct Enumerated {
    /// Per entry `(0,0), (0,1), (1,0), (1,1)`, the posterior mass of each bin.
    pub marginals: [[f64; GRID]; 4],
}

impl Enumerated {
    pub fn mean(&self, entry: usize) -> f64 {
        self.marginals[entry]
            .iter()
            .enumerate()
            .map(|(i, p)| p * OracleProblem::grid_value(i))
            .sum()
    }
}

/// Binned reward marginals of a chain, same layout as [`Enumerated`].
pub fn chain_marginals(chain: &Chain) -> [[f64; GRID]; 4] {
    let mut out = [[0.0; GRID]; 4];
    let n = chain.samples.len() as f64;
    for sample in &chain.samples {
        for (entry, &p) in sample.reward.table().as_slice().iter().enumerate() {
            out[entry][OracleProblem::bin(p)] += 1.0 / n;
        }
    }
    out
}

pub fn chain_mean(chain: &Chain, entry: usize) -> f64 {
    chain
        .samples
        .iter()
        .map(|s| s.reward.table().as_slice()[entry])
        .sum::<f64>()
        / chain.samples.len() as f64
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Largest per-entry mean error and marginal TV distance of a chain.
pub fn oracle_distance(chain: &Chain, oracle: &Enumerated) -> (f64, f64) {
    let marginals = chain_marginals(chain);
    let mut mean_err: f64 = 0.0;
    let mut tv: f64 = 0.0;
    for entry in 0..4 {
        mean_err = mean_err.max((chain_mean(chain, entry) - oracle.mean(entry)).abs());
        tv = tv.max(total_variation(&marginals[entry], &oracle.marginals[entry]));
    }
    (mean_err, tv)
}

/// Sample mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn same_tuple(a: &JointSample, b: &JointSample) -> bool {
    a.reward == b.reward
        && a.eta.to_bits() == b.eta.to_bits()
        && a.policy == b.policy
        && a.log_likelihood.to_bits() == b.log_likelihood.to_bits()
}

/// Replays a chain's audit trail: every proposal at least as likely as the
/// current state was accepted, and every kept sample after a rejection
/// repeats its predecessor. Needs `thin = 1`.
pub fn audit_chain(chain: &Chain) -> Result<(), String> {
    if chain.steps.len() != chain.config.n_samples {
        return Err(format!(
            "{} steps for {} iterations",
            chain.steps.len(),
            chain.config.n_samples
        ));
    }
    for (k, step) in chain.steps.iter().enumerate() {
        match step.proposed_log_likelihood {
            Some(p) if p >= step.current_log_likelihood && !step.accepted => {
                return Err(format!("iteration {k}: improving proposal rejected"));
            }
            None if step.accepted => {
                return Err(format!("iteration {k}: unevaluated proposal accepted"));
            }
            _ => {}
        }
    }
    if chain.config.thin != 1 {
        return Err("audit needs an unthinned chain".into());
    }
    let burn_in = chain.config.burn_in;
    for k in 1..chain.samples.len() {
        if !chain.steps[burn_in + k].accepted
            && !same_tuple(&chain.samples[k], &chain.samples[k - 1])
        {
            return Err(format!("sample {k} changed after a rejection"));
        }
    }
    let accepted = chain.steps.iter().filter(|s| s.accepted).count();
    if chain.acceptance_rate != accepted as f64 / chain.steps.len() as f64 {
        return Err("acceptance rate disagrees with the audit trail".into());
    }
    Ok(())
}

/// `(P_ref(s) - P_a(s)) (I - gamma P_ref)^{-1} R` for every state and every
/// non-reference action, recomputed from scratch.
pub fn lp_gaps(
    cmp: &ControlledMarkovProcess,
    gamma: f64,
    reference: &[usize],
    r: &[f64],
) -> Vec<Vec<f64>> {
    let n = cmp.n_states();
    let system = DMatrix::from_fn(n, n, |i, j| {
        f64::from(u8::from(i == j)) - gamma * cmp.row(i, reference[i])[j]
    });
    let v = system.lu().solve(&DVector::from_column_slice(r)).unwrap();
    (0..n)
        .map(|s| {
            (0..cmp.n_actions())
                .filter(|&a| a != reference[s])
                .map(|a| {
                    cmp.row(s, reference[s])
                        .iter()
                        .zip(cmp.row(s, a))
                        .zip(v.iter())
                        .map(|((p, q), x)| (p - q) * x)
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Random stochastic rows with every entry bounded away from zero.
pub fn random_rows<R: rand::Rng>(n: usize, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let row: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = row.iter().sum();
            row.into_iter().map(|p| p / total).collect()
        })
        .collect()
}
