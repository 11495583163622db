//! C interface to `irl_elicit`.
//!
//! Objects cross the boundary as opaque handles created by `irl_*_new` style
//! functions and released with the matching `irl_*_free`. Every fallible
//! function returns an [`IrlStatus`]; on failure a message describing the
//! error is available from [`irl_last_error_message`] on the same thread.
//! Panics are caught at the boundary and reported as `IRL_STATUS_PANIC`.
//!
//! Arrays are row-major: reward and policy tables hold
//! `n_states * n_actions` doubles indexed `[state * n_actions + action]`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use irl_elicit::baselines::{discounted_state_occupancy, lp_irl, ml_policy_estimate};
use irl_elicit::env::{
    make_demonstrator, sample_maze, sample_random_mdp, sample_reward, simulate, BetaProductPrior,
};
use irl_elicit::harness::{parse_settings, run_batch_to_file, ExperimentConfig};
use irl_elicit::mdp::{
    greedy_policy, l1_loss, solve_optimal_q, ControlledMarkovProcess, Discount, Mdp, Policy,
    RewardModel, SolverOptions, Table, Trajectory,
};
use irl_elicit::rng::prng;
use irl_elicit::samplers::{
    chain_policy, gibbs_chain, mh_chain, posterior_mean_reward, Chain, GammaPrior, GibbsAcceptance,
    SamplerConfig,
};
use irl_elicit::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    IndexOutOfRange = 4,
    NotConverged = 5,
    RetryCapExceeded = 6,
    LinearProgram = 7,
    EmptyChain = 8,
    Config = 9,
    Format = 10,
    Io = 11,
    Utf8 = 12,
    Panic = 13,
}

impl From<&Error> for IrlStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Invalid { .. } => IrlStatus::InvalidArgument,
            Error::Dimension(_) => IrlStatus::Dimension,
            Error::IndexOutOfRange(_) => IrlStatus::IndexOutOfRange,
            Error::NotConverged { .. } => IrlStatus::NotConverged,
            Error::RetryCapExceeded { .. } => IrlStatus::RetryCapExceeded,
            Error::Lp(_) => IrlStatus::LinearProgram,
            Error::EmptyChain => IrlStatus::EmptyChain,
            Error::Config(_) => IrlStatus::Config,
            Error::Format(_) | Error::Json(_) | Error::Csv(_) => IrlStatus::Format,
            Error::Io(_) => IrlStatus::Io,
        }
    }
}

/// Environment dynamics (a controlled Markov process).
pub struct IrlEnv(ControlledMarkovProcess);
/// Bernoulli success probabilities per state-action pair.
pub struct IrlReward(RewardModel);
/// Stochastic policy.
pub struct IrlPolicy(Policy);
/// Demonstrated state-action sequence.
pub struct IrlTrajectory(Trajectory);
/// Posterior samples of a chain.
pub struct IrlChain(Chain);

/// Plain-data sampler settings.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IrlSamplerConfig {
    /// Total iterations, burn-in included.
    pub n_samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub q_tol: f64,
    pub q_max_iter: usize,
    /// Nonzero selects the marginal-corrected Gibbs acceptance rule.
    pub gibbs_marginal_corrected: i32,
}

impl From<IrlSamplerConfig> for SamplerConfig {
    fn from(c: IrlSamplerConfig) -> Self {
        SamplerConfig {
            n_samples: c.n_samples,
            burn_in: c.burn_in,
            thin: c.thin,
            q_tol: c.q_tol,
            q_max_iter: c.q_max_iter,
            gibbs_acceptance: if c.gibbs_marginal_corrected != 0 {
                GibbsAcceptance::MarginalCorrected
            } else {
                GibbsAcceptance::Augmented
            },
        }
    }
}

/// Priors shared by the samplers.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IrlPriors {
    /// Beta prior on every success probability.
    pub alpha: f64,
    pub beta: f64,
    /// Gamma prior on the inverse temperature.
    pub gamma_shape: f64,
    pub gamma_rate: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(IrlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(IrlStatus::from(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn null(what: &str) -> Failure {
    Failure(IrlStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> FfiResult<()>) -> IrlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => IrlStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("panic: {message}"));
            IrlStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write_slice(out: *mut f64, len: usize, values: &[f64]) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("output array"));
    }
    if len != values.len() {
        return Err(Failure(
            IrlStatus::Dimension,
            format!("output array holds {len} values, {} required", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, len);
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> FfiResult<&'a str> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(IrlStatus::Utf8, format!("{what}: {e}")))
}

fn discount(gamma: f64) -> FfiResult<Discount> {
    Ok(Discount::new(gamma)?)
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn irl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn irl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default sampler settings (10000 iterations, 2000 burn-in).
#[no_mangle]
pub extern "C" fn irl_sampler_config_default() -> IrlSamplerConfig {
    let c = SamplerConfig::default();
    IrlSamplerConfig {
        n_samples: c.n_samples,
        burn_in: c.burn_in,
        thin: c.thin,
        q_tol: c.q_tol,
        q_max_iter: c.q_max_iter,
        gibbs_marginal_corrected: 0,
    }
}

/// Beta(1, 1) rewards and a Gamma(2, 0.5) temperature.
#[no_mangle]
pub extern "C" fn irl_priors_default() -> IrlPriors {
    let g = GammaPrior::default();
    IrlPriors {
        alpha: 1.0,
        beta: 1.0,
        gamma_shape: g.shape,
        gamma_rate: g.rate,
    }
}

/// Random communicating MDP with `n_actions` actions per state.
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn irl_env_random_mdp(
    n_states: usize,
    n_actions: usize,
    seed: u64,
    out: *mut *mut IrlEnv,
) -> IrlStatus {
    guard(|| {
        let cmp = sample_random_mdp(n_states, n_actions, &mut prng(seed))?;
        store(out, IrlEnv(cmp))
    })
}

/// Random maze on a `width` x `height` grid; states are the free cells in
/// row-major order and actions are north, east, south, west.
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn irl_env_maze(
    width: usize,
    height: usize,
    seed: u64,
    out: *mut *mut IrlEnv,
) -> IrlStatus {
    guard(|| {
        let (cmp, _) = sample_maze(width, height, &mut prng(seed))?;
        store(out, IrlEnv(cmp))
    })
}

/// Environment from its JSON form (see [`irl_env_to_json`]).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn irl_env_from_json(
    json: *const c_char,
    out: *mut *mut IrlEnv,
) -> IrlStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let cmp: ControlledMarkovProcess = serde_json::from_str(text).map_err(Error::from)?;
        store(out, IrlEnv(cmp))
    })
}

/// JSON object with `n_states`, `n_actions`, `transitions[s][a][s']` and
/// `initial_dist`. Free the string with [`irl_string_free`].
///
/// # Safety
/// `env` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn irl_env_to_json(env: *const IrlEnv, out: *mut *mut c_char) -> IrlStatus {
    guard(|| {
        let env = borrow(env, "env")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let text = serde_json::to_string(&env.0).map_err(Error::from)?;
        *out = CString::new(text).unwrap_or_default().into_raw();
        Ok(())
    })
}

/// # Safety
/// `env` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn irl_env_n_states(env: *const IrlEnv) -> usize {
    env.as_ref().map_or(0, |e| e.0.n_states())
}

/// # Safety
/// `env` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn irl_env_n_actions(env: *const IrlEnv) -> usize {
    env.as_ref().map_or(0, |e| e.0.n_actions())
}

/// # Safety
/// `env` must come from this library and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn irl_env_free(env: *mut IrlEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Reward model from `n_states * n_actions` probabilities.
///
/// # Safety
/// `values` must point to `n_states * n_actions` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn irl_reward_from_array(
    n_states: usize,
    n_actions: usize,
    values: *const f64,
    out: *mut *mut IrlReward,
) -> IrlStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let len = n_states
            .checked_mul(n_actions)
            .ok_or_else(|| Failure(IrlStatus::Dimension, "table too large".into()))?;
        let data = std::slice::from_raw_parts(values, len).to_vec();
        let reward = RewardModel::new(Table::from_flat(n_states, n_actions, data)?)?;
        store(out, IrlReward(reward))
    })
}

/// Reward model drawn from a Beta(`alpha`, `beta`) product prior.
///
/// # Safety
/// `env` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn irl_reward_sample(
    env: *const IrlEnv,
    alpha: f64,
    beta: f64,
    seed: u64,
    out: *mut *mut IrlReward,
) -> IrlStatus {
    guard(|| {
        let env = borrow(env, "env")?;
        let prior = BetaProductPrior::uniform(env.0.n_states(), env.0.n_actions(), alpha, beta)?;
        store(out, IrlReward(sample_reward(&prior, &mut prng(seed))))
    })
}

/// Copies the success probabilities into `out` (`len` must equal
/// `n_states * n_actions`).
///
/// # Safety
/// `reward` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn irl_reward_values(
    reward: *const IrlReward,
    out: *mut f64,
    len: usize,
) -> IrlStatus {
    guard(|| {
        let reward = borrow(reward, "reward")?;
        write_slice(out, len, reward.0.table().as_slice())
    })
}

/// # Safety
/// `reward` must come from this library and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn irl_reward_free(reward: *mut IrlReward) {
    if !reward.is_null() {
        drop(Box::from_raw(reward));
    }
}

/// Softmax policy over the optimal Q values at inverse temperature `eta`.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn irl_policy_softmax(
    env: *const IrlEnv,
    reward: *const IrlReward,
    gamma: f64,
    eta: f64,
    out: *mut *mut IrlPolicy,
) -> IrlStatus {
    guard(|| {
        let (env, reward) = (borrow(env, "env")?, borrow(reward, "reward")?);
        let mdp = Mdp::new(&env.0, &reward.0, discount(gamma)?)?;
        let policy = make_demonstrator(&mdp, eta, SolverOptions::default().tol)?;
        store(out, IrlPolicy(policy))
    })
}

/// Greedy policy of the optimal Q values, uniform over actions within
/// `tie_tol` of the best.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn irl_policy_greedy(
    env: *const IrlEnv,
    reward: *const IrlReward,
    gamma: f64,
    tie_tol: f64,
    out: *mut *mut IrlPolicy,
) -> IrlStatus {
    guard(|| {
        let (env, reward) = (borrow(env, "env")?, borrow(reward, "reward")?);
        let mdp = Mdp::new(&env.0, &reward.0, discount(gamma)?)?;
        let options = SolverOptions::default();
        let q = solve_optimal_q(&mdp, options.tol, options.max_iter)?;
        store(out, IrlPolicy(greedy_policy(&q, tie_tol)))
    })
}

/// Maximum-likelihood policy estimate from a demonstration.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn irl_policy_estimate(
    env: *const IrlEnv,
    traj: *const IrlTrajectory,
    out: *mut *mut IrlPolicy,
) -> IrlStatus {
    guard(|| {
        let (env, traj) = (borrow(env, "env")?, borrow(traj, "trajectory")?);
        let est = ml_policy_estimate(&traj.0, env.0.n_states(), env.0.n_actions())?;
        store(out, IrlPolicy(est.policy))
    })
}

/// Copies the action probabilities into `out` (`len` must equal
/// `n_states * n_actions`).
///
/// # Safety
/// `policy` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn irl_policy_values(
    policy: *const IrlPolicy,
    out: *mut f64,
    len: usize,
) -> IrlStatus {
    guard(|| {
        let policy = borrow(policy, "policy")?;
        write_slice(out, len, policy.0.table().as_slice())
    })
}

/// # Safety
/// `policy` must come from this library and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn irl_policy_free(policy: *mut IrlPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

/// Value loss `sum_s V*(s) - V^pi(s)` of `policy` under `reward`.
///
/// # Safety
/// Handles must be live and `loss` valid.
#[no_mangle]
pub unsafe extern "C" fn irl_l1_loss(
    env: *const IrlEnv,
    reward: *const IrlReward,
    gamma: f64,
    policy: *const IrlPolicy,
    loss: *mut f64,
) -> IrlStatus {
    guard(|| {
        let (env, reward) = (borrow(env, "env")?, borrow(reward, "reward")?);
        let policy = borrow(policy, "policy")?;
        if loss.is_null() {
            return Err(null("loss"));
        }
        let mdp = Mdp::new(&env.0, &reward.0, discount(gamma)?)?;
        *loss = l1_loss(&mdp, &policy.0, 1e-10)?;
        Ok(())
    })
}

/// Discounted state occupancy of `policy` from the initial distribution;
/// `len` must equal the state count.
///
/// # Safety
/// Handles must be live and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn irl_state_occupancy(
    env: *const IrlEnv,
    policy: *const IrlPolicy,
    gamma: f64,
    out: *mut f64,
    len: usize,
) -> IrlStatus {
    guard(|| {
        let (env, policy) = (borrow(env, "env")?, borrow(policy, "policy")?);
        let occ = discounted_state_occupancy(&env.0, &policy.0, discount(gamma)?)?;
        write_slice(out, len, occ.as_slice())
    })
}

/// State reward recovered by the linear program, broadcast over actions.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn irl_lp_reward(
    env: *const IrlEnv,
    policy: *const IrlPolicy,
    gamma: f64,
    penalty: f64,
    r_max: f64,
    out: *mut *mut IrlReward,
) -> IrlStatus {
    guard(|| {
        let (env, policy) = (borrow(env, "env")?, borrow(policy, "policy")?);
        let reward = lp_irl(&env.0, discount(gamma)?, &policy.0, penalty, r_max)?;
        store(out, IrlReward(reward))
    })
}

/// Rolls out `policy` for `horizon` steps.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn irl_simulate(
    env: *const IrlEnv,
    reward: *const IrlReward,
    policy: *const IrlPolicy,
    horizon: usize,
    seed: u64,
    out: *mut *mut IrlTrajectory,
) -> IrlStatus {
    guard(|| {
        let (env, reward) = (borrow(env, "env")?, borrow(reward, "reward")?);
        let policy = borrow(policy, "policy")?;
        let traj = simulate(&env.0, &reward.0, &policy.0, horizon, &mut prng(seed))?;
        store(out, IrlTrajectory(traj))
    })
}

/// Trajectory from parallel state and action arrays of length `len`.
///
/// # Safety
/// `states` and `actions` must hold `len` entries; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn irl_trajectory_from_arrays(
    states: *const usize,
    actions: *const usize,
    len: usize,
    out: *mut *mut IrlTrajectory,
) -> IrlStatus {
    guard(|| {
        if len > 0 && (states.is_null() || actions.is_null()) {
            return Err(null("states or actions"));
        }
        let copy = |p: *const usize| {
            if len == 0 {
                Vec::new()
            } else {
                std::slice::from_raw_parts(p, len).to_vec()
            }
        };
        let traj = Trajectory::new(copy(states), copy(actions))?;
        store(out, IrlTrajectory(traj))
    })
}

/// # Safety
/// `traj` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn irl_trajectory_len(traj: *const IrlTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Copies states and actions into arrays of length `len` (the trajectory
/// length).
///
/// # Safety
/// `traj` must be live; `states` and `actions` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn irl_trajectory_copy(
    traj: *const IrlTrajectory,
    states: *mut usize,
    actions: *mut usize,
    len: usize,
) -> IrlStatus {
    guard(|| {
        let traj = borrow(traj, "trajectory")?;
        if len != traj.0.len() {
            return Err(Failure(
                IrlStatus::Dimension,
                format!("arrays hold {len} entries, trajectory has {}", traj.0.len()),
            ));
        }
        if len == 0 {
            return Ok(());
        }
        if states.is_null() || actions.is_null() {
            return Err(null("states or actions"));
        }
        ptr::copy_nonoverlapping(traj.0.states.as_ptr(), states, len);
        ptr::copy_nonoverlapping(traj.0.actions.as_ptr(), actions, len);
        Ok(())
    })
}

/// # Safety
/// `traj` must come from this library and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn irl_trajectory_free(traj: *mut IrlTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

#[allow(clippy::too_many_arguments)]
unsafe fn run_sampler(
    gibbs: bool,
    env: *const IrlEnv,
    gamma: f64,
    priors: *const IrlPriors,
    traj: *const IrlTrajectory,
    config: *const IrlSamplerConfig,
    seed: u64,
    out: *mut *mut IrlChain,
) -> IrlStatus {
    guard(|| {
        let (env, traj) = (borrow(env, "env")?, borrow(traj, "trajectory")?);
        let priors = *borrow(priors, "priors")?;
        let config: SamplerConfig = (*borrow(config, "config")?).into();
        let reward_prior = BetaProductPrior::uniform(
            env.0.n_states(),
            env.0.n_actions(),
            priors.alpha,
            priors.beta,
        )?;
        let temp_prior = GammaPrior::new(priors.gamma_shape, priors.gamma_rate)?;
        let sampler = if gibbs { gibbs_chain } else { mh_chain };
        let chain = sampler(
            &env.0,
            discount(gamma)?,
            &reward_prior,
            temp_prior,
            &traj.0,
            &config,
            &mut prng(seed),
        )?;
        store(out, IrlChain(chain))
    })
}

/// Metropolis-Hastings chain over rewards and inverse temperature.
///
/// # Safety
/// Handles and pointers must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn irl_mh_chain(
    env: *const IrlEnv,
    gamma: f64,
    priors: *const IrlPriors,
    traj: *const IrlTrajectory,
    config: *const IrlSamplerConfig,
    seed: u64,
    out: *mut *mut IrlChain,
) -> IrlStatus {
    run_sampler(false, env, gamma, priors, traj, config, seed, out)
}

/// Gibbs sampler with latent reward sequences.
///
/// # Safety
/// Handles and pointers must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn irl_gibbs_chain(
    env: *const IrlEnv,
    gamma: f64,
    priors: *const IrlPriors,
    traj: *const IrlTrajectory,
    config: *const IrlSamplerConfig,
    seed: u64,
    out: *mut *mut IrlChain,
) -> IrlStatus {
    run_sampler(true, env, gamma, priors, traj, config, seed, out)
}

/// Number of kept samples.
///
/// # Safety
/// `chain` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn irl_chain_len(chain: *const IrlChain) -> usize {
    chain.as_ref().map_or(0, |c| c.0.samples.len())
}

/// Fraction of accepted proposals, burn-in included; NaN for null.
///
/// # Safety
/// `chain` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn irl_chain_acceptance_rate(chain: *const IrlChain) -> f64 {
    chain.as_ref().map_or(f64::NAN, |c| c.0.acceptance_rate)
}

/// Posterior-mean reward of the chain.
///
/// # Safety
/// `chain` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn irl_chain_mean_reward(
    chain: *const IrlChain,
    out: *mut *mut IrlReward,
) -> IrlStatus {
    guard(|| {
        let chain = borrow(chain, "chain")?;
        store(out, IrlReward(posterior_mean_reward(&chain.0)?))
    })
}

/// Greedy policy of the chain's posterior-mean reward.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn irl_chain_policy(
    chain: *const IrlChain,
    env: *const IrlEnv,
    gamma: f64,
    tie_tol: f64,
    out: *mut *mut IrlPolicy,
) -> IrlStatus {
    guard(|| {
        let (chain, env) = (borrow(chain, "chain")?, borrow(env, "env")?);
        let policy = chain_policy(&chain.0, &env.0, discount(gamma)?, tie_tol)?;
        store(out, IrlPolicy(policy))
    })
}

/// Chain as JSON (samples, acceptance rate, config and per-iteration audit
/// trail). Free the string with [`irl_string_free`].
///
/// # Safety
/// `chain` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn irl_chain_to_json(
    chain: *const IrlChain,
    out: *mut *mut c_char,
) -> IrlStatus {
    guard(|| {
        let chain = borrow(chain, "chain")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let text = serde_json::to_string(&chain.0).map_err(Error::from)?;
        *out = CString::new(text).unwrap_or_default().into_raw();
        Ok(())
    })
}

/// # Safety
/// `chain` must come from this library and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn irl_chain_free(chain: *mut IrlChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Runs an experiment batch described by `settings` (the `key = value`
/// config-file format) and writes results to `out_path`, with the aggregate
/// next to it. `n_errors` receives the number of error records and may be
/// null.
///
/// # Safety
/// Strings must be NUL-terminated; `n_errors` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn irl_run_batch(
    settings: *const c_char,
    out_path: *const c_char,
    n_errors: *mut usize,
) -> IrlStatus {
    guard(|| {
        let text = read_str(settings, "settings")?;
        let path = read_str(out_path, "out_path")?;
        let mut config = ExperimentConfig::default();
        config.apply(&parse_settings(text)?)?;
        config.validate()?;
        let outcome = run_batch_to_file(&config, Path::new(path))?;
        if !n_errors.is_null() {
            *n_errors = outcome.error_count();
        }
        Ok(())
    })
}
