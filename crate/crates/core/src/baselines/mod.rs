//! Comparison methods: linear-programming reward recovery, a Q-sum
//! Metropolis-Hastings chain seeded from it, and multiplicative-weights
//! apprenticeship learning, plus the policy estimators they consume.

mod estimate;
mod lp_irl;
mod mwal;
mod occupancy;
mod policy_walk;
pub mod simplex;

pub use estimate::{laplace_policy_estimate, ml_policy_estimate, PolicyEstimate};
pub use lp_irl::{lp_irl, lp_irl_solve, LpIrlSolution, DEFAULT_LP_PENALTY, DEFAULT_R_MAX};
pub use mwal::{
    mwal, mwal_schedule, MixedPolicy, MwalOptions, MwalResult, DEFAULT_ACCURACY, DEFAULT_MAX_ROUNDS,
};
pub use occupancy::{
    discounted_state_occupancy, discounted_state_occupancy_from,
    discounted_state_occupancy_iterative, OccupancyVector,
};
pub use policy_walk::{policy_walk_chain, DEFAULT_CONFIDENCE};
