//! Dense tableau simplex for small problems of the form
//!
//! ```text
//! maximize c.x  subject to  A x <= b,  x >= 0,  with b >= 0.
//! ```
//!
//! `b >= 0` makes the all-slack basis feasible, so no phase one is needed.
//! Pivoting follows Bland's rule, which cannot cycle.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Vec<f64>>,
    pub bounds: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Objective value after every pivot, starting from the initial basis.
    pub objective_trace: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
            bounds: Vec::new(),
        }
    }

    /// Adds `row . x <= bound`.
    pub fn add_constraint(&mut self, row: Vec<f64>, bound: f64) {
        self.constraints.push(row);
        self.bounds.push(bound);
    }

    pub fn solve(&self, max_pivots: usize) -> Result<LpSolution> {
        let n = self.objective.len();
        let m = self.constraints.len();
        if self.constraints.iter().any(|r| r.len() != n) {
            return Err(Error::Lp("constraint width differs from objective".into()));
        }
        if let Some(b) = self.bounds.iter().find(|b| !(**b >= 0.0)) {
            return Err(Error::Lp(format!("right-hand side {b} is negative")));
        }

        // Tableau columns: n structural, m slack, then the right-hand side.
        let width = n + m + 1;
        let mut tab = vec![0.0; (m + 1) * width];
        for (i, row) in self.constraints.iter().enumerate() {
            tab[i * width..i * width + n].copy_from_slice(row);
            tab[i * width + n + i] = 1.0;
            tab[i * width + width - 1] = self.bounds[i];
        }
        // Reduced-cost row holds -c, so the objective is at its rhs.
        let obj = m * width;
        for (j, c) in self.objective.iter().enumerate() {
            tab[obj + j] = -c;
        }
        let mut basis: Vec<usize> = (n..n + m).collect();
        let mut trace = vec![tab[obj + width - 1]];

        for _ in 0..max_pivots {
            let Some(enter) = (0..n + m).find(|&j| tab[obj + j] < -PIVOT_EPS) else {
                let mut x = vec![0.0; n];
                for (i, &var) in basis.iter().enumerate() {
                    if var < n {
                        x[var] = tab[i * width + width - 1];
                    }
                }
                return Ok(LpSolution {
                    x,
                    objective: tab[obj + width - 1],
                    objective_trace: trace,
                });
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = tab[i * width + enter];
                if a > PIVOT_EPS {
                    let ratio = tab[i * width + width - 1] / a;
                    leave = match leave {
                        Some((best, r))
                            if r < ratio - PIVOT_EPS
                                || (ratio - r).abs() <= PIVOT_EPS && basis[best] < basis[i] =>
                        {
                            Some((best, r))
                        }
                        _ => Some((i, ratio)),
                    };
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::Lp("objective is unbounded".into()));
            };
            pivot(&mut tab, width, m + 1, row, enter);
            basis[row] = enter;
            trace.push(tab[obj + width - 1]);
        }
        Err(Error::Lp(format!("no optimum within {max_pivots} pivots")))
    }
}

fn pivot(tab: &mut [f64], width: usize, rows: usize, row: usize, col: usize) {
    let p = tab[row * width + col];
    for v in &mut tab[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row = tab[row * width..(row + 1) * width].to_vec();
    for r in (0..rows).filter(|&r| r != row) {
        let factor = tab[r * width + col];
        if factor != 0.0 {
            for (v, pv) in tab[r * width..(r + 1) * width].iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
        }
    }
}
