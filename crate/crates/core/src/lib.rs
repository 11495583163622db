//! Bayesian inverse reinforcement learning on tabular MDPs.
//!
//! Given the dynamics of an environment and one demonstrated trajectory, the
//! samplers in [`samplers`] draw from the joint posterior over the
//! demonstrator's reward function and its softmax inverse temperature. The
//! [`baselines`] module holds the comparison methods and [`harness`] runs the
//! comparative experiments end to end.

pub mod baselines;
pub mod env;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
