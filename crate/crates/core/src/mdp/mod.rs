//! Tabular Markov decision processes.
//!
//! Environments are infinite-horizon and discounted. Rewards are Bernoulli
//! in `{0, 1}`, so the expected reward table of an MDP is the table of
//! success probabilities held by [`RewardModel`].

mod policy;
mod solve;

pub use policy::{greedy_policy, softmax_policy, trajectory_log_likelihood};
pub use solve::{
    bellman_residual, evaluate_policy_q, l1_loss, policy_value, solve_optimal_q, SolverOptions,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sums must match 1 within this tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-9;

fn check_distribution(what: &'static str, row: &[f64]) -> Result<()> {
    if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::invalid(
            what,
            format!("entry {p} is not a probability"),
        ));
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::invalid(what, format!("row sums to {total}")));
    }
    Ok(())
}

/// Known environment dynamics: a transition kernel and an initial-state
/// distribution, without rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CmpRepr", into = "CmpRepr")]
pub struct ControlledMarkovProcess {
    n_states: usize,
    n_actions: usize,
    /// Dense `[state][action][next_state]` table, flattened.
    transitions: Vec<f64>,
    initial_dist: Vec<f64>,
    /// Nonzero entries of each `(state, action)` row, in state order.
    sparse: Vec<Vec<(usize, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct CmpRepr {
    n_states: usize,
    n_actions: usize,
    transitions: Vec<Vec<Vec<f64>>>,
    initial_dist: Vec<f64>,
}

impl TryFrom<CmpRepr> for ControlledMarkovProcess {
    type Error = Error;

    fn try_from(repr: CmpRepr) -> Result<Self> {
        let cmp = ControlledMarkovProcess::new(repr.transitions, repr.initial_dist)?;
        if cmp.n_states != repr.n_states || cmp.n_actions != repr.n_actions {
            return Err(Error::Dimension(format!(
                "declared {}x{} but table is {}x{}",
                repr.n_states, repr.n_actions, cmp.n_states, cmp.n_actions
            )));
        }
        Ok(cmp)
    }
}

impl From<ControlledMarkovProcess> for CmpRepr {
    fn from(cmp: ControlledMarkovProcess) -> Self {
        let transitions = (0..cmp.n_states)
            .map(|s| (0..cmp.n_actions).map(|a| cmp.row(s, a).to_vec()).collect())
            .collect();
        CmpRepr {
            n_states: cmp.n_states,
            n_actions: cmp.n_actions,
            transitions,
            initial_dist: cmp.initial_dist,
        }
    }
}

impl ControlledMarkovProcess {
    /// Builds a process from `transitions[state][action][next_state]`.
    pub fn new(transitions: Vec<Vec<Vec<f64>>>, initial_dist: Vec<f64>) -> Result<Self> {
        let n_states = transitions.len();
        if n_states == 0 {
            return Err(Error::invalid("transition kernel", "no states"));
        }
        let n_actions = transitions[0].len();
        if n_actions == 0 {
            return Err(Error::invalid("transition kernel", "no actions"));
        }
        let mut flat = Vec::with_capacity(n_states * n_actions * n_states);
        for (s, per_action) in transitions.iter().enumerate() {
            if per_action.len() != n_actions {
                return Err(Error::Dimension(format!(
                    "state {s} has {} actions, expected {n_actions}",
                    per_action.len()
                )));
            }
            for row in per_action {
                if row.len() != n_states {
                    return Err(Error::Dimension(format!(
                        "transition row of state {s} has length {}, expected {n_states}",
                        row.len()
                    )));
                }
                check_distribution("transition row", row)?;
                flat.extend_from_slice(row);
            }
        }
        if initial_dist.len() != n_states {
            return Err(Error::Dimension(format!(
                "initial distribution has length {}, expected {n_states}",
                initial_dist.len()
            )));
        }
        check_distribution("initial distribution", &initial_dist)?;

        let sparse = flat
            .chunks(n_states)
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(j, p)| (j, *p))
                    .collect()
            })
            .collect();
        Ok(ControlledMarkovProcess {
            n_states,
            n_actions,
            transitions: flat,
            initial_dist,
            sparse,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Distribution over next states after taking `action` in `state`.
    pub fn row(&self, state: usize, action: usize) -> &[f64] {
        let start = (state * self.n_actions + action) * self.n_states;
        &self.transitions[start..start + self.n_states]
    }

    /// Nonzero `(next_state, probability)` pairs of a transition row.
    pub fn successors(&self, state: usize, action: usize) -> &[(usize, f64)] {
        &self.sparse[state * self.n_actions + action]
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    /// Markov chain `P_pi[s][s'] = sum_a pi(a|s) T(s'|s,a)`, row-major.
    pub fn induced_chain(&self, policy: &Policy) -> Result<Vec<f64>> {
        self.check_policy(policy)?;
        let n = self.n_states;
        let mut chain = vec![0.0; n * n];
        for s in 0..n {
            for a in 0..self.n_actions {
                let w = policy.prob(s, a);
                if w == 0.0 {
                    continue;
                }
                for &(next, p) in self.successors(s, a) {
                    chain[s * n + next] += w * p;
                }
            }
        }
        Ok(chain)
    }

    pub(crate) fn check_policy(&self, policy: &Policy) -> Result<()> {
        if policy.n_states() != self.n_states || policy.n_actions() != self.n_actions {
            return Err(Error::Dimension(format!(
                "policy is {}x{}, environment is {}x{}",
                policy.n_states(),
                policy.n_actions(),
                self.n_states,
                self.n_actions
            )));
        }
        Ok(())
    }

    pub(crate) fn check_reward(&self, reward: &RewardModel) -> Result<()> {
        if reward.n_states() != self.n_states || reward.n_actions() != self.n_actions {
            return Err(Error::Dimension(format!(
                "reward is {}x{}, environment is {}x{}",
                reward.n_states(),
                reward.n_actions(),
                self.n_states,
                self.n_actions
            )));
        }
        Ok(())
    }

    pub(crate) fn check_trajectory(&self, traj: &Trajectory) -> Result<()> {
        traj.check_bounds(self.n_states, self.n_actions)
    }
}

/// Dense `(state, action)` table of reals, row-major by state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Table {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
}

impl Table {
    pub fn filled(n_states: usize, n_actions: usize, value: f64) -> Self {
        Table {
            n_states,
            n_actions,
            values: vec![value; n_states * n_actions],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_states = rows.len();
        let n_actions = rows.first().map_or(0, Vec::len);
        if n_states == 0 || n_actions == 0 {
            return Err(Error::Dimension("empty table".into()));
        }
        if rows.iter().any(|r| r.len() != n_actions) {
            return Err(Error::Dimension("ragged table rows".into()));
        }
        Ok(Table {
            n_states,
            n_actions,
            values: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_flat(n_states: usize, n_actions: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_states * n_actions || values.is_empty() {
            return Err(Error::Dimension(format!(
                "{} values for a {n_states}x{n_actions} table",
                values.len()
            )));
        }
        Ok(Table {
            n_states,
            n_actions,
            values,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.n_actions + action]
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        self.values[state * self.n_actions + action] = value;
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.n_actions..(state + 1) * self.n_actions]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n_actions)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

impl TryFrom<Vec<Vec<f64>>> for Table {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Table::from_rows(rows)
    }
}

impl From<Table> for Vec<Vec<f64>> {
    fn from(t: Table) -> Self {
        t.rows().map(<[f64]>::to_vec).collect()
    }
}

/// Per-`(state, action)` Bernoulli success probabilities. The table is also
/// the expected reward function of the environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Table", into = "Table")]
pub struct RewardModel(Table);

impl RewardModel {
    pub fn new(success_prob: Table) -> Result<Self> {
        if let Some(p) = success_prob
            .as_slice()
            .iter()
            .find(|p| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::invalid(
                "reward model",
                format!("{p} outside [0, 1]"),
            ));
        }
        Ok(RewardModel(success_prob))
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        RewardModel::new(Table::from_rows(rows)?)
    }

    pub fn constant(n_states: usize, n_actions: usize, p: f64) -> Result<Self> {
        RewardModel::new(Table::filled(n_states, n_actions, p))
    }

    pub fn n_states(&self) -> usize {
        self.0.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.0.n_actions
    }

    pub fn success_prob(&self, state: usize, action: usize) -> f64 {
        self.0.get(state, action)
    }

    pub fn table(&self) -> &Table {
        &self.0
    }
}

impl TryFrom<Table> for RewardModel {
    type Error = Error;
    fn try_from(t: Table) -> Result<Self> {
        RewardModel::new(t)
    }
}

impl From<RewardModel> for Table {
    fn from(r: RewardModel) -> Self {
        r.0
    }
}

/// Stochastic action-selection table `pi(a|s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Table", into = "Table")]
pub struct Policy(Table);

impl Policy {
    pub fn new(action_prob: Table) -> Result<Self> {
        for row in action_prob.rows() {
            check_distribution("policy row", row)?;
        }
        Ok(Policy(action_prob))
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Policy::new(Table::from_rows(rows)?)
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Policy(Table::filled(n_states, n_actions, 1.0 / n_actions as f64))
    }

    /// Policy that always takes `actions[s]` in state `s`.
    pub fn deterministic(actions: &[usize], n_actions: usize) -> Result<Self> {
        let mut t = Table::filled(actions.len(), n_actions, 0.0);
        for (s, &a) in actions.iter().enumerate() {
            if a >= n_actions {
                return Err(Error::IndexOutOfRange(format!("action {a} in state {s}")));
            }
            t.set(s, a, 1.0);
        }
        Policy::new(t)
    }

    /// Constructors in this crate build rows that are stochastic by
    /// construction.
    pub(crate) fn from_table_unchecked(t: Table) -> Self {
        debug_assert!(t
            .rows()
            .all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= STOCHASTIC_TOL));
        Policy(t)
    }

    pub fn n_states(&self) -> usize {
        self.0.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.0.n_actions
    }

    pub fn prob(&self, state: usize, action: usize) -> f64 {
        self.0.get(state, action)
    }

    pub fn row(&self, state: usize) -> &[f64] {
        self.0.row(state)
    }

    pub fn table(&self) -> &Table {
        &self.0
    }

    /// Per-state argmax, lowest index on ties.
    pub fn argmax_actions(&self) -> Vec<usize> {
        self.0
            .rows()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (a, &p)| {
                        if p > best.1 {
                            (a, p)
                        } else {
                            best
                        }
                    })
                    .0
            })
            .collect()
    }
}

impl TryFrom<Table> for Policy {
    type Error = Error;
    fn try_from(t: Table) -> Result<Self> {
        Policy::new(t)
    }
}

impl From<Policy> for Table {
    fn from(p: Policy) -> Self {
        p.0
    }
}

/// State-action values.
pub type QTable = Table;

/// State values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VTable(pub Vec<f64>);

impl VTable {
    pub fn get(&self, state: usize) -> f64 {
        self.0[state]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Discount factor in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Discount(f64);

impl Discount {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::invalid("discount", format!("{gamma} not in [0, 1)")));
        }
        Ok(Discount(gamma))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Discount {
    type Error = Error;
    fn try_from(g: f64) -> Result<Self> {
        Discount::new(g)
    }
}

impl From<Discount> for f64 {
    fn from(d: Discount) -> f64 {
        d.0
    }
}

/// Environment dynamics plus a reward model and discount.
#[derive(Debug, Clone, Copy)]
pub struct Mdp<'a> {
    pub cmp: &'a ControlledMarkovProcess,
    pub reward: &'a RewardModel,
    pub discount: Discount,
}

impl<'a> Mdp<'a> {
    pub fn new(
        cmp: &'a ControlledMarkovProcess,
        reward: &'a RewardModel,
        discount: Discount,
    ) -> Result<Self> {
        cmp.check_reward(reward)?;
        Ok(Mdp {
            cmp,
            reward,
            discount,
        })
    }

    pub fn n_states(&self) -> usize {
        self.cmp.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.cmp.n_actions
    }
}

/// A demonstration: visited states, chosen actions and optionally the
/// observed rewards.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewards: Option<Vec<bool>>,
}

impl Trajectory {
    pub fn new(states: Vec<usize>, actions: Vec<usize>) -> Result<Self> {
        if states.len() != actions.len() {
            return Err(Error::Dimension(format!(
                "{} states but {} actions",
                states.len(),
                actions.len()
            )));
        }
        Ok(Trajectory {
            states,
            actions,
            rewards: None,
        })
    }

    pub fn with_rewards(mut self, rewards: Vec<bool>) -> Result<Self> {
        if rewards.len() != self.states.len() {
            return Err(Error::Dimension(format!(
                "{} rewards for a trajectory of length {}",
                rewards.len(),
                self.states.len()
            )));
        }
        self.rewards = Some(rewards);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.states
            .iter()
            .copied()
            .zip(self.actions.iter().copied())
    }

    /// Appends `other` after `self`. Rewards are kept only if both carry them.
    pub fn concat(&self, other: &Trajectory) -> Trajectory {
        let rewards = match (&self.rewards, &other.rewards) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        Trajectory {
            states: self.states.iter().chain(&other.states).copied().collect(),
            actions: self.actions.iter().chain(&other.actions).copied().collect(),
            rewards,
        }
    }

    /// Visit counts per `(state, action)`, row-major.
    pub fn visit_counts(&self, n_states: usize, n_actions: usize) -> Result<Vec<u64>> {
        self.check_bounds(n_states, n_actions)?;
        let mut counts = vec![0u64; n_states * n_actions];
        for (s, a) in self.pairs() {
            counts[s * n_actions + a] += 1;
        }
        Ok(counts)
    }

    pub(crate) fn check_bounds(&self, n_states: usize, n_actions: usize) -> Result<()> {
        if self.states.len() != self.actions.len() {
            return Err(Error::Dimension(
                "states and actions differ in length".into(),
            ));
        }
        if let Some(r) = &self.rewards {
            if r.len() != self.states.len() {
                return Err(Error::Dimension("rewards differ in length".into()));
            }
        }
        for (t, (s, a)) in self.pairs().enumerate() {
            if s >= n_states || a >= n_actions {
                return Err(Error::IndexOutOfRange(format!(
                    "step {t}: (state {s}, action {a}) outside {n_states}x{n_actions}"
                )));
            }
        }
        Ok(())
    }
}
