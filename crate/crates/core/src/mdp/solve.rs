use serde::{Deserialize, Serialize};

use super::{Mdp, Policy, QTable, Table, VTable};
use crate::error::{Error, Result};

/// Stopping rule shared by the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Sup-norm Bellman residual at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            max_iter: 100_000,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "tolerance",
            format!("{tol} is not positive"),
        ))
    }
}

/// One Bellman backup: `out(s,a) = r(s,a) + gamma * sum_s' T(s'|s,a) v(s')`.
/// Returns the sup-norm change from `out`'s previous contents.
fn backup(mdp: &Mdp<'_>, v: &[f64], out: &mut Table) -> f64 {
    let gamma = mdp.discount.get();
    let n_actions = mdp.n_actions();
    let mut change: f64 = 0.0;
    for (i, q) in out.as_mut_slice().iter_mut().enumerate() {
        let (s, a) = (i / n_actions, i % n_actions);
        let future: f64 = mdp
            .cmp
            .successors(s, a)
            .iter()
            .map(|&(next, p)| p * v[next])
            .sum();
        let updated = mdp.reward.success_prob(s, a) + gamma * future;
        change = change.max((updated - *q).abs());
        *q = updated;
    }
    change
}

fn max_per_state(q: &Table, v: &mut [f64]) {
    for (vs, row) in v.iter_mut().zip(q.rows()) {
        *vs = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
}

fn expect_per_state(q: &Table, policy: &Policy, v: &mut [f64]) {
    for (s, (vs, row)) in v.iter_mut().zip(q.rows()).enumerate() {
        *vs = row.iter().zip(policy.row(s)).map(|(q, p)| p * q).sum();
    }
}

/// Optimal state-action values by value iteration.
///
/// Iterates until successive iterates differ by at most `tol` in sup norm,
/// which bounds the Bellman residual of the returned table by `gamma * tol`.
pub fn solve_optimal_q(mdp: &Mdp<'_>, tol: f64, max_iter: usize) -> Result<QTable> {
    check_tol(tol)?;
    let mut q = Table::filled(mdp.n_states(), mdp.n_actions(), 0.0);
    let mut v = vec![0.0; mdp.n_states()];
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        change = backup(mdp, &v, &mut q);
        if change <= tol {
            return Ok(q);
        }
        max_per_state(&q, &mut v);
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: change,
    })
}

/// State-action values of `policy` by iterative evaluation.
pub fn evaluate_policy_q(mdp: &Mdp<'_>, policy: &Policy, tol: f64) -> Result<QTable> {
    check_tol(tol)?;
    mdp.cmp.check_policy(policy)?;
    let max_iter = SolverOptions::default().max_iter;
    let mut q = Table::filled(mdp.n_states(), mdp.n_actions(), 0.0);
    let mut v = vec![0.0; mdp.n_states()];
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        change = backup(mdp, &v, &mut q);
        if change <= tol {
            return Ok(q);
        }
        expect_per_state(&q, policy, &mut v);
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: change,
    })
}

/// `V^pi(s) = sum_a pi(a|s) Q^pi(s,a)`.
pub fn policy_value(mdp: &Mdp<'_>, policy: &Policy, tol: f64) -> Result<VTable> {
    let q = evaluate_policy_q(mdp, policy, tol)?;
    let mut v = vec![0.0; mdp.n_states()];
    expect_per_state(&q, policy, &mut v);
    Ok(VTable(v))
}

/// Sup-norm residual `|| T*q - q ||` of the optimality operator.
pub fn bellman_residual(mdp: &Mdp<'_>, q: &QTable) -> f64 {
    let mut v = vec![0.0; mdp.n_states()];
    max_per_state(q, &mut v);
    let mut next = q.clone();
    backup(mdp, &v, &mut next)
}

/// Total value lost by `policy` relative to the optimal policy,
/// `sum_s V*(s) - V^pi(s)`, with each state's term clamped at zero.
pub fn l1_loss(mdp: &Mdp<'_>, policy: &Policy, tol: f64) -> Result<f64> {
    let q_star = solve_optimal_q(mdp, tol, SolverOptions::default().max_iter)?;
    let mut v_star = vec![0.0; mdp.n_states()];
    max_per_state(&q_star, &mut v_star);
    let v_pi = policy_value(mdp, policy, tol)?;
    Ok(v_star
        .iter()
        .zip(v_pi.as_slice())
        .map(|(opt, pi)| (opt - pi).max(0.0))
        .sum())
}
