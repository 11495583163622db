use nalgebra::DMatrix;

use super::simplex::LinearProgram;
use crate::error::{Error, Result};
use crate::mdp::{ControlledMarkovProcess, Discount, Policy, RewardModel, Table};

pub const DEFAULT_LP_PENALTY: f64 = 1.05;
pub const DEFAULT_R_MAX: f64 = 1.0;
const MAX_PIVOTS: usize = 100_000;

/// Full output of the linear-programming reward recovery.
#[derive(Debug, Clone)]
pub struct LpIrlSolution {
    /// Recovered state reward `R(s)`.
    pub state_reward: Vec<f64>,
    /// `R` broadcast over actions.
    pub reward: RewardModel,
    /// `sum_s min_a gap(s, a) . R - penalty * sum_s R(s)` at the optimum.
    pub objective: f64,
    /// Rows `(P_{a*}(s) - P_a(s)) (I - gamma P_{a*})^{-1}` for every state and
    /// non-reference action, as `(state, action, row)`.
    pub gap_rows: Vec<(usize, usize, Vec<f64>)>,
    /// Deterministic reference policy the LP separates.
    pub reference_actions: Vec<usize>,
    pub objective_trace: Vec<f64>,
}

impl LpIrlSolution {
    /// Smallest value of any gap constraint at the solution.
    pub fn min_gap(&self) -> f64 {
        self.gap_rows
            .iter()
            .map(|(_, _, row)| dot(row, &self.state_reward))
            .fold(f64::INFINITY, f64::min)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// State reward for which the reference policy (the per-state argmax of
/// `policy`, lowest index on ties) is optimal, maximizing the summed value gap
/// to the best alternative action minus an L1 penalty.
pub fn lp_irl(
    cmp: &ControlledMarkovProcess,
    discount: Discount,
    policy: &Policy,
    penalty: f64,
    r_max: f64,
) -> Result<RewardModel> {
    Ok(lp_irl_solve(cmp, discount, policy, penalty, r_max)?.reward)
}

pub fn lp_irl_solve(
    cmp: &ControlledMarkovProcess,
    discount: Discount,
    policy: &Policy,
    penalty: f64,
    r_max: f64,
) -> Result<LpIrlSolution> {
    cmp.check_policy(policy)?;
    if !(penalty >= 0.0 && penalty.is_finite()) {
        return Err(Error::invalid("LP penalty", format!("{penalty}")));
    }
    if !(r_max > 0.0 && r_max <= 1.0) {
        return Err(Error::invalid(
            "LP reward bound",
            format!("{r_max} outside (0, 1]"),
        ));
    }
    let n = cmp.n_states();
    let n_actions = cmp.n_actions();
    let reference = policy.argmax_actions();

    // (I - gamma P_ref)^{-1}
    let gamma = discount.get();
    let system = DMatrix::from_fn(n, n, |i, j| {
        f64::from(u8::from(i == j)) - gamma * cmp.row(i, reference[i])[j]
    });
    let inverse = system
        .try_inverse()
        .ok_or_else(|| Error::Lp("reference transition system is singular".into()))?;

    let mut gap_rows = Vec::with_capacity(n * n_actions.saturating_sub(1));
    for (s, &best) in reference.iter().enumerate() {
        for a in (0..n_actions).filter(|&a| a != best) {
            let diff: Vec<f64> = cmp
                .row(s, best)
                .iter()
                .zip(cmp.row(s, a))
                .map(|(p, q)| p - q)
                .collect();
            let row = (0..n)
                .map(|j| (0..n).map(|k| diff[k] * inverse[(k, j)]).sum())
                .collect();
            gap_rows.push((s, a, row));
        }
    }

    if n_actions == 1 {
        // No alternative actions: every reward separates the policy.
        let state_reward = vec![0.0; n];
        return Ok(LpIrlSolution {
            reward: RewardModel::constant(n, 1, 0.0)?,
            state_reward,
            objective: 0.0,
            gap_rows,
            reference_actions: reference,
            objective_trace: vec![0.0],
        });
    }

    // Variables: R(0..n), t(0..n) with t(s) <= every gap of state s.
    let mut objective = vec![-penalty; n];
    objective.extend(std::iter::repeat_n(1.0, n));
    let mut lp = LinearProgram::new(objective);
    for (s, _, row) in &gap_rows {
        let mut feasibility: Vec<f64> = row.iter().map(|v| -v).collect();
        feasibility.extend(std::iter::repeat_n(0.0, n));
        lp.add_constraint(feasibility.clone(), 0.0);
        let mut margin = feasibility;
        margin[n + s] = 1.0;
        lp.add_constraint(margin, 0.0);
    }
    for s in 0..n {
        let mut bound = vec![0.0; 2 * n];
        bound[s] = 1.0;
        lp.add_constraint(bound, r_max);
    }
    let solution = lp.solve(MAX_PIVOTS)?;

    let state_reward: Vec<f64> = solution.x[..n]
        .iter()
        .map(|r| r.clamp(0.0, r_max))
        .collect();
    let mut table = Table::filled(n, n_actions, 0.0);
    for (s, &r) in state_reward.iter().enumerate() {
        for a in 0..n_actions {
            table.set(s, a, r);
        }
    }
    Ok(LpIrlSolution {
        reward: RewardModel::new(table)?,
        state_reward,
        objective: solution.objective,
        gap_rows,
        reference_actions: reference,
        objective_trace: solution.objective_trace,
    })
}
