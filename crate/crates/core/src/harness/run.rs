use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{
    Domain, EnvSize, ExperimentConfig, Method, OccupancyStart, PolicyEstimator, SweepPoint,
};
use super::records::RunRecord;
use crate::baselines::{
    discounted_state_occupancy_from, laplace_policy_estimate, lp_irl, ml_policy_estimate, mwal,
    policy_walk_chain, MixedPolicy, MwalOptions, PolicyEstimate,
};
use crate::env::{
    make_demonstrator, sample_maze, sample_random_mdp, sample_reward, simulate, BetaProductPrior,
    MazeSpec,
};
use crate::error::{Error, Result};
use crate::mdp::{
    greedy_policy, l1_loss, solve_optimal_q, ControlledMarkovProcess, Discount, Mdp, Policy,
    RewardModel, SolverOptions, Trajectory,
};
use crate::rng::{derive_seed, hash64, prng};
use crate::samplers::{chain_policy_with, gibbs_chain, mh_chain, Chain};

/// Value-iteration tolerance used to score policies. Much tighter than the
/// sampler tolerance so that scoring error stays far below loss differences.
pub const EVAL_TOL: f64 = 1e-10;

/// Child stream tags of a run seed.
mod stream {
    pub const ENVIRONMENT: u64 = 1;
    pub const REWARD: u64 = 2;
    pub const DEMONSTRATION: u64 = 3;
    pub const MH: u64 = 4;
    pub const GIBBS: u64 = 5;
    pub const POLICY_WALK: u64 = 6;
}

/// Seed of run `run_index` at sweep point `sweep_index`.
pub fn run_seed(master_seed: u64, run_index: usize, sweep_index: usize) -> u64 {
    hash64(&[master_seed, run_index as u64, sweep_index as u64])
}

/// Identifier of a run, unique within a batch.
pub fn run_id(config: &ExperimentConfig, run_index: usize, sweep_index: usize) -> u64 {
    (sweep_index * config.n_runs + run_index) as u64
}

/// Everything a run shares across methods: the environment, the true reward,
/// the demonstrator and its single demonstration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSetup {
    pub seed: u64,
    pub cmp: ControlledMarkovProcess,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maze: Option<MazeSpec>,
    pub discount: Discount,
    pub true_reward: RewardModel,
    pub eta: f64,
    pub demonstrator: Policy,
    pub demonstration: Trajectory,
}

impl RunSetup {
    pub fn mdp(&self) -> Mdp<'_> {
        Mdp {
            cmp: &self.cmp,
            reward: &self.true_reward,
            discount: self.discount,
        }
    }
}

/// Samples the environment, true reward and demonstration of one run.
pub fn prepare_run(config: &ExperimentConfig, point: &SweepPoint, seed: u64) -> Result<RunSetup> {
    let discount = Discount::new(config.discount)?;
    let mut env_rng = prng(derive_seed(seed, stream::ENVIRONMENT));
    let (cmp, maze) = match (config.domain, point.size) {
        (Domain::RandomMdp, EnvSize::States(n)) => {
            (sample_random_mdp(n, config.n_actions, &mut env_rng)?, None)
        }
        (Domain::Maze, EnvSize::Grid { width, height }) => {
            let (cmp, spec) = sample_maze(width, height, &mut env_rng)?;
            (cmp, Some(spec))
        }
        (domain, size) => {
            return Err(Error::Config(format!(
                "size {size} does not fit domain {domain}"
            )))
        }
    };
    let prior = reward_prior(config, &cmp)?;
    let true_reward = sample_reward(&prior, &mut prng(derive_seed(seed, stream::REWARD)));
    let mdp = Mdp::new(&cmp, &true_reward, discount)?;
    let demonstrator = make_demonstrator(&mdp, point.eta, EVAL_TOL)?;
    let demonstration = simulate(
        &cmp,
        &true_reward,
        &demonstrator,
        point.horizon,
        &mut prng(derive_seed(seed, stream::DEMONSTRATION)),
    )?;
    Ok(RunSetup {
        seed,
        cmp,
        maze,
        discount,
        true_reward,
        eta: point.eta,
        demonstrator,
        demonstration,
    })
}

fn reward_prior(
    config: &ExperimentConfig,
    cmp: &ControlledMarkovProcess,
) -> Result<BetaProductPrior> {
    let (a, b) = config.beta_prior;
    BetaProductPrior::uniform(cmp.n_states(), cmp.n_actions(), a, b)
}

/// Policy each method extracts from the run's demonstration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MethodOutput {
    Policy(Policy),
    Mixture(MixedPolicy),
}

impl MethodOutput {
    pub fn loss(&self, mdp: &Mdp<'_>) -> Result<f64> {
        match self {
            MethodOutput::Policy(p) => l1_loss(mdp, p, EVAL_TOL),
            MethodOutput::Mixture(m) => m.l1_loss(mdp, EVAL_TOL),
        }
    }
}

/// Runs methods against one prepared run. Intermediate results shared
/// between methods (the policy estimate and the LP reward) are computed once.
pub struct MethodRunner<'a> {
    config: &'a ExperimentConfig,
    setup: &'a RunSetup,
    prior: BetaProductPrior,
    estimate: Option<PolicyEstimate>,
    lp_reward: Option<RewardModel>,
}

impl<'a> MethodRunner<'a> {
    pub fn new(config: &'a ExperimentConfig, setup: &'a RunSetup) -> Result<Self> {
        Ok(MethodRunner {
            config,
            setup,
            prior: reward_prior(config, &setup.cmp)?,
            estimate: None,
            lp_reward: None,
        })
    }

    fn policy_estimate(&mut self) -> Result<&PolicyEstimate> {
        if self.estimate.is_none() {
            let cmp = &self.setup.cmp;
            let traj = &self.setup.demonstration;
            let laplace = match self.config.policy_estimator {
                PolicyEstimator::Auto => self.config.domain == Domain::Maze,
                PolicyEstimator::MaxLikelihood => false,
                PolicyEstimator::Laplace => true,
            };
            let est = if laplace {
                laplace_policy_estimate(traj, cmp.n_states(), cmp.n_actions())?
            } else {
                ml_policy_estimate(traj, cmp.n_states(), cmp.n_actions())?
            };
            self.estimate = Some(est);
        }
        Ok(self.estimate.as_ref().expect("set above"))
    }

    fn lp_reward(&mut self) -> Result<RewardModel> {
        if self.lp_reward.is_none() {
            let policy = self.policy_estimate()?.policy.clone();
            let reward = lp_irl(
                &self.setup.cmp,
                self.setup.discount,
                &policy,
                self.config.lp_penalty,
                self.config.lp_r_max,
            )?;
            self.lp_reward = Some(reward);
        }
        Ok(self.lp_reward.clone().expect("set above"))
    }

    fn greedy_for(&self, reward: &RewardModel) -> Result<Policy> {
        let mdp = Mdp::new(&self.setup.cmp, reward, self.setup.discount)?;
        let solver = SolverOptions::default();
        let q = solve_optimal_q(&mdp, solver.tol, solver.max_iter)?;
        Ok(greedy_policy(&q, self.config.tie_tol))
    }

    fn chain_output(&self, chain: &Chain) -> Result<MethodOutput> {
        let policy = chain_policy_with(
            chain,
            &self.setup.cmp,
            self.setup.discount,
            self.config.tie_tol,
            self.config.point_estimate,
        )?;
        Ok(MethodOutput::Policy(policy))
    }

    /// Policy or policy mixture produced by `method`.
    pub fn run(&mut self, method: Method) -> Result<MethodOutput> {
        let setup = self.setup;
        let config = self.config;
        let stream_rng = |tag| prng(derive_seed(setup.seed, tag));
        match method {
            Method::Soft => Ok(MethodOutput::Policy(setup.demonstrator.clone())),
            Method::Mh => {
                let chain = mh_chain(
                    &setup.cmp,
                    setup.discount,
                    &self.prior,
                    config.gamma_prior,
                    &setup.demonstration,
                    &config.sampler,
                    &mut stream_rng(stream::MH),
                )?;
                self.chain_output(&chain)
            }
            Method::Gibbs => {
                let chain = gibbs_chain(
                    &setup.cmp,
                    setup.discount,
                    &self.prior,
                    config.gamma_prior,
                    &setup.demonstration,
                    &config.sampler,
                    &mut stream_rng(stream::GIBBS),
                )?;
                self.chain_output(&chain)
            }
            Method::Lp => {
                let reward = self.lp_reward()?;
                Ok(MethodOutput::Policy(self.greedy_for(&reward)?))
            }
            Method::PolicyWalk => {
                let seed_reward = self.lp_reward()?;
                let chain = policy_walk_chain(
                    &setup.cmp,
                    setup.discount,
                    &self.prior,
                    &setup.demonstration,
                    config.pw_confidence,
                    &config.sampler,
                    &seed_reward,
                    &mut stream_rng(stream::POLICY_WALK),
                )?;
                self.chain_output(&chain)
            }
            Method::Mwal => {
                let policy = self.policy_estimate()?.policy.clone();
                let n = setup.cmp.n_states();
                let start = match (config.occupancy_start, setup.demonstration.states.first()) {
                    (OccupancyStart::FirstState, Some(&s0)) => {
                        let mut d = vec![0.0; n];
                        d[s0] = 1.0;
                        d
                    }
                    _ => setup.cmp.initial_dist().to_vec(),
                };
                let demo =
                    discounted_state_occupancy_from(&setup.cmp, &policy, setup.discount, &start)?;
                let options = MwalOptions {
                    max_rounds: config.mwal_max_rounds,
                    solver: SolverOptions::default(),
                    tie_tol: config.tie_tol,
                };
                let result = mwal(
                    &setup.cmp,
                    setup.discount,
                    &demo,
                    config.mwal_accuracy,
                    &options,
                )?;
                Ok(MethodOutput::Mixture(result.mixture))
            }
        }
    }
}

/// Runs every configured method on run `run_index` at `point`.
pub fn run_single(
    config: &ExperimentConfig,
    point: &SweepPoint,
    run_index: usize,
) -> Vec<RunRecord> {
    let seed = run_seed(config.master_seed, run_index, point.index);
    run_with_seed(config, point, run_id(config, run_index, point.index), seed)
}

/// Runs every configured method with an explicit run seed. One record per
/// method; failures become error records and do not stop other methods.
pub fn run_with_seed(
    config: &ExperimentConfig,
    point: &SweepPoint,
    run_id: u64,
    seed: u64,
) -> Vec<RunRecord> {
    let axis = config.sweep_axis();
    let record = |method, n_states, outcome: std::result::Result<f64, String>, wall_time_ms| {
        let (loss, error) = match outcome {
            Ok(loss) => (Some(loss), None),
            Err(e) => (None, Some(e)),
        };
        RunRecord {
            run_id,
            sweep_axis: axis,
            sweep_value: point.value(axis),
            method,
            loss,
            eta: point.eta,
            horizon: point.horizon,
            n_states,
            discount: config.discount,
            seed,
            wall_time_ms,
            error,
        }
    };
    let setup = prepare_run(config, point, seed);
    let runner = setup
        .as_ref()
        .map_err(|e| e.to_string())
        .and_then(|s| MethodRunner::new(config, s).map_err(|e| e.to_string()));
    let (setup, mut runner) = match (&setup, runner) {
        (Ok(setup), Ok(runner)) => (setup, runner),
        (_, Err(e)) => {
            log::warn!("run {run_id}: setup failed: {e}");
            let n_states = point.size.magnitude();
            return config
                .methods
                .iter()
                .map(|&m| record(m, n_states, Err(format!("setup failed: {e}")), None))
                .collect();
        }
        (Err(_), Ok(_)) => unreachable!("runner requires a setup"),
    };
    let n_states = setup.cmp.n_states();
    config
        .methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let outcome = runner
                .run(method)
                .and_then(|out| out.loss(&setup.mdp()))
                .map_err(|e| e.to_string());
            let elapsed = config
                .record_timing
                .then(|| start.elapsed().as_millis() as u64);
            if let Err(e) = &outcome {
                log::warn!("run {run_id}, method {method}: {e}");
            }
            record(method, n_states, outcome, elapsed)
        })
        .collect()
}
