//! Average-reward planning and optimistic exploration in finite
//! semi-Markov decision processes (SMDPs) and in MDPs with options.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: SMDP data model, distributions, validation, model files.
//! - [`options`]: option sets over a base MDP, compilation into the induced
//!   SMDP and phase-type analysis of option durations.
//! - [`planning`]: uniformization, value iteration, extended value
//!   iteration over plausible sets, a policy-enumeration gain oracle and the
//!   SMDP diameter.
//! - [`learning`]: the optimistic learner, a plain MDP baseline, regret
//!   ledgers and the regret decomposition for options.
//! - [`env`]: grid-world and two-state lower-bound environments.
//! - [`harness`]: experiment plans, multi-seed runs and CSV output.
//!
//! Runnable entry points live in `examples/`:
//!
//! - `plan_model`: plan on a model file and print gain, policy, diameter.
//! - `compile_options`: compile grid options and inspect the induced SMDP.
//! - `phase_type`: holding-time laws of options as absorbing chains.
//! - `learn_grid`: run the learner on the grid and write a ledger CSV.
//! - `regret_decomposition`: options run with the decomposition identity.
//! - `lower_bound`: the two-state constructions and their closed forms.
//! - `reproduce_ratio`: a small regret-ratio sweep over option lengths.

pub mod env;
pub mod error;
pub mod harness;
pub mod learning;
pub mod linalg;
pub mod model;
pub mod options;
pub mod planning;

pub use error::{Error, Result};
