use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{ControlledMarkovProcess, Discount, Policy};

/// Discounted expected visits per state, `sum_t gamma^(t-1) Pr(s_t = s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyVector(pub Vec<f64>);

impl OccupancyVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Scaled by `1 - gamma` so the entries sum to one.
    pub fn normalized(&self, discount: Discount) -> Vec<f64> {
        let scale = 1.0 - discount.get();
        self.0.iter().map(|x| x * scale).collect()
    }
}

/// Occupancy of `policy` started from the process's initial distribution.
pub fn discounted_state_occupancy(
    cmp: &ControlledMarkovProcess,
    policy: &Policy,
    discount: Discount,
) -> Result<OccupancyVector> {
    discounted_state_occupancy_from(cmp, policy, discount, cmp.initial_dist())
}

/// Solves `(I - gamma P_pi^T) x = start`.
pub fn discounted_state_occupancy_from(
    cmp: &ControlledMarkovProcess,
    policy: &Policy,
    discount: Discount,
    start: &[f64],
) -> Result<OccupancyVector> {
    let n = cmp.n_states();
    if start.len() != n {
        return Err(Error::Dimension(format!(
            "start distribution has length {}, expected {n}",
            start.len()
        )));
    }
    let chain = cmp.induced_chain(policy)?;
    let gamma = discount.get();
    // (I - gamma P^T)[i][j] = delta_ij - gamma P[j][i]
    let system = DMatrix::from_fn(n, n, |i, j| {
        f64::from(u8::from(i == j)) - gamma * chain[j * n + i]
    });
    let rhs = DVector::from_column_slice(start);
    let x = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::invalid("occupancy", "singular flow system"))?;
    Ok(OccupancyVector(x.iter().map(|v| v.max(0.0)).collect()))
}

/// Fixed-point iteration `x <- start + gamma P_pi^T x` to sup-norm change
/// `tol`.
pub fn discounted_state_occupancy_iterative(
    cmp: &ControlledMarkovProcess,
    policy: &Policy,
    discount: Discount,
    tol: f64,
) -> Result<OccupancyVector> {
    let n = cmp.n_states();
    let chain = cmp.induced_chain(policy)?;
    let gamma = discount.get();
    let start = cmp.initial_dist();
    let mut x = start.to_vec();
    let mut next = vec![0.0; n];
    loop {
        next.copy_from_slice(start);
        for (s, &mass) in x.iter().enumerate() {
            for (j, out) in next.iter_mut().enumerate() {
                *out += gamma * mass * chain[s * n + j];
            }
        }
        let change = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if change <= tol {
            return Ok(OccupancyVector(x));
        }
    }
}
