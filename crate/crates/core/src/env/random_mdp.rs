use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;

use super::DEFAULT_RETRY_CAP;
use crate::error::{Error, Result};
use crate::mdp::ControlledMarkovProcess;

/// Random MDP where every `(state, action)` moves to a random subset of
/// `ceil(n_states / 4)` states with uniformly drawn, normalized arrival
/// probabilities. Draws are rejected until the process is communicating.
pub fn sample_random_mdp<R: Rng + ?Sized>(
    n_states: usize,
    n_actions: usize,
    rng: &mut R,
) -> Result<ControlledMarkovProcess> {
    sample_random_mdp_with(n_states, n_actions, DEFAULT_RETRY_CAP, rng)
}

pub fn sample_random_mdp_with<R: Rng + ?Sized>(
    n_states: usize,
    n_actions: usize,
    retry_cap: usize,
    rng: &mut R,
) -> Result<ControlledMarkovProcess> {
    if n_states < 4 {
        return Err(Error::invalid(
            "random MDP",
            format!("{n_states} states, need at least 4"),
        ));
    }
    if n_actions == 0 {
        return Err(Error::invalid("random MDP", "no actions"));
    }
    let destinations = n_states.div_ceil(4);
    let initial = vec![1.0 / n_states as f64; n_states];
    for _ in 0..retry_cap {
        let transitions: Vec<Vec<Vec<f64>>> = (0..n_states)
            .map(|_| {
                (0..n_actions)
                    .map(|_| {
                        let mut row = vec![0.0; n_states];
                        for next in index::sample(rng, n_states, destinations) {
                            // (0, 1] so that every destination keeps positive mass
                            row[next] = 1.0 - rng.random::<f64>();
                        }
                        let total: f64 = row.iter().sum();
                        row.iter_mut().for_each(|p| *p /= total);
                        row
                    })
                    .collect()
            })
            .collect();
        let cmp = ControlledMarkovProcess::new(transitions, initial.clone())?;
        if is_communicating(&cmp) {
            return Ok(cmp);
        }
    }
    Err(Error::RetryCapExceeded {
        what: "communicating random MDP",
        attempts: retry_cap,
    })
}

/// Whether every state reaches every other state when all actions are
/// allowed, i.e. the chain of the uniform policy has one communicating class.
pub fn is_communicating(cmp: &ControlledMarkovProcess) -> bool {
    let n = cmp.n_states();
    let mut forward = vec![Vec::new(); n];
    let mut backward = vec![Vec::new(); n];
    for s in 0..n {
        for a in 0..cmp.n_actions() {
            for &(next, _) in cmp.successors(s, a) {
                forward[s].push(next);
                backward[next].push(s);
            }
        }
    }
    reaches_all(&forward) && reaches_all(&backward)
}

fn reaches_all(adjacency: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; adjacency.len()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(s) = queue.pop_front() {
        for &next in &adjacency[s] {
            if !seen[next] {
                seen[next] = true;
                queue.push_back(next);
            }
        }
    }
    seen.into_iter().all(|x| x)
}
