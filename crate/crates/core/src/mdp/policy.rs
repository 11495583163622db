use super::{Policy, QTable, Table, Trajectory};
use crate::error::Result;

/// Boltzmann policy `pi(a|s) ∝ exp(eta * Q(s,a))` with inverse temperature
/// `eta`.
///
/// # Panics
/// If `eta` is negative or not finite.
pub fn softmax_policy(q: &QTable, eta: f64) -> Policy {
    assert!(
        eta >= 0.0 && eta.is_finite(),
        "inverse temperature must be finite and non-negative, got {eta}"
    );
    let mut out = Table::filled(q.n_states(), q.n_actions(), 0.0);
    for (s, row) in q.rows().enumerate() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (a, &value) in row.iter().enumerate() {
            let w = (eta * (value - max)).exp();
            out.set(s, a, w);
            total += w;
        }
        for a in 0..q.n_actions() {
            out.set(s, a, out.get(s, a) / total);
        }
    }
    Policy::from_table_unchecked(out)
}

/// Uniform over the actions whose value is within `tie_tol` of the best.
pub fn greedy_policy(q: &QTable, tie_tol: f64) -> Policy {
    let mut out = Table::filled(q.n_states(), q.n_actions(), 0.0);
    for (s, row) in q.rows().enumerate() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let threshold = max - tie_tol;
        let ties = row.iter().filter(|v| **v >= threshold).count();
        let p = 1.0 / ties as f64;
        for (a, &value) in row.iter().enumerate() {
            if value >= threshold {
                out.set(s, a, p);
            }
        }
    }
    Policy::from_table_unchecked(out)
}

/// `sum_t ln pi(a_t | s_t)`. Transition probabilities are not included: they
/// do not depend on the policy and cancel in every posterior ratio.
///
/// Returns negative infinity when some demonstrated action has probability
/// zero, and `0` for an empty trajectory.
pub fn trajectory_log_likelihood(policy: &Policy, traj: &Trajectory) -> Result<f64> {
    traj.check_bounds(policy.n_states(), policy.n_actions())?;
    let mut total = 0.0;
    for (s, a) in traj.pairs() {
        let p = policy.prob(s, a);
        if p <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += p.ln();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn q(rows: Vec<Vec<f64>>) -> QTable {
        Table::from_rows(rows).unwrap()
    }

    #[test]
    fn softmax_zero_eta_is_uniform() {
        let p = softmax_policy(&q(vec![vec![3.0, -1.0, 0.5]]), 0.0);
        for a in 0..3 {
            assert!((p.prob(0, a) - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_ln3() {
        let p = softmax_policy(&q(vec![vec![1.0, 0.0]]), 3f64.ln());
        assert!((p.prob(0, 0) - 0.75).abs() < 1e-12);
        assert!((p.prob(0, 1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn softmax_huge_eta_is_greedy() {
        let p = softmax_policy(&q(vec![vec![0.2, 0.21, 0.1]]), 1e6);
        assert!(p.prob(0, 1) >= 1.0 - 1e-9);
    }

    #[test]
    #[should_panic]
    fn softmax_rejects_negative_eta() {
        softmax_policy(&q(vec![vec![0.0, 1.0]]), -1.0);
    }

    #[test]
    fn greedy_cases() {
        let p = greedy_policy(&q(vec![vec![2.0, 1.0, 1.0]]), 1e-9);
        assert_eq!(p.row(0), &[1.0, 0.0, 0.0]);
        let p = greedy_policy(&q(vec![vec![1.0, 1.0]]), 0.0);
        assert_eq!(p.row(0), &[0.5, 0.5]);
        let tie_tol = 1e-3;
        let p = greedy_policy(&q(vec![vec![1.0, 1.0 - tie_tol / 2.0]]), tie_tol);
        assert_eq!(p.row(0), &[0.5, 0.5]);
    }

    #[test]
    fn log_likelihood_cases() {
        let det = Policy::deterministic(&[1, 0], 2).unwrap();
        let t = Trajectory::new(vec![0, 1, 0], vec![1, 0, 1]).unwrap();
        assert_eq!(trajectory_log_likelihood(&det, &t).unwrap(), 0.0);

        let uniform = Policy::uniform(2, 4);
        let t = Trajectory::new(vec![0, 1, 1], vec![3, 2, 0]).unwrap();
        let ll = trajectory_log_likelihood(&uniform, &t).unwrap();
        assert!((ll - 3.0 * 0.25f64.ln()).abs() < 1e-12);
        assert!((ll + 4.1589).abs() < 1e-4);

        let t = Trajectory::new(vec![0], vec![0]).unwrap();
        assert_eq!(
            trajectory_log_likelihood(&det, &t).unwrap(),
            f64::NEG_INFINITY
        );

        assert_eq!(
            trajectory_log_likelihood(&det, &Trajectory::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn log_likelihood_index_errors() {
        let t = Trajectory::new(vec![5], vec![0]).unwrap();
        assert!(matches!(
            trajectory_log_likelihood(&Policy::uniform(2, 2), &t),
            Err(Error::IndexOutOfRange(_))
        ));
    }
}
