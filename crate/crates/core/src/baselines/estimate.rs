use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mdp::{Policy, Table, Trajectory};

/// A policy estimated from demonstrated actions, with the counts behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyEstimate {
    pub policy: Policy,
    /// Row-major `(state, action)` visit counts.
    pub visit_counts: Vec<u64>,
}

impl PolicyEstimate {
    pub fn count(&self, state: usize, action: usize) -> u64 {
        self.visit_counts[state * self.policy.n_actions() + action]
    }
}

fn estimate(
    traj: &Trajectory,
    n_states: usize,
    n_actions: usize,
    pseudo_count: f64,
) -> Result<PolicyEstimate> {
    let counts = traj.visit_counts(n_states, n_actions)?;
    let mut table = Table::filled(n_states, n_actions, 0.0);
    for (s, row) in counts.chunks(n_actions).enumerate() {
        let total: u64 = row.iter().sum();
        let denom = total as f64 + pseudo_count * n_actions as f64;
        for (a, &c) in row.iter().enumerate() {
            let p = if denom > 0.0 {
                (c as f64 + pseudo_count) / denom
            } else {
                1.0 / n_actions as f64
            };
            table.set(s, a, p);
        }
    }
    Ok(PolicyEstimate {
        policy: Policy::new(table)?,
        visit_counts: counts,
    })
}

/// Empirical action frequencies per state; unvisited states get a uniform
/// row.
pub fn ml_policy_estimate(
    traj: &Trajectory,
    n_states: usize,
    n_actions: usize,
) -> Result<PolicyEstimate> {
    estimate(traj, n_states, n_actions, 0.0)
}

/// Add-one smoothed action frequencies, the posterior mean under a uniform
/// Dirichlet prior on every row.
pub fn laplace_policy_estimate(
    traj: &Trajectory,
    n_states: usize,
    n_actions: usize,
) -> Result<PolicyEstimate> {
    estimate(traj, n_states, n_actions, 1.0)
}
