//! Options over a base MDP: declaration, compilation into the induced SMDP,
//! phase-type analysis of their durations and execution at primitive level.

mod compile;
mod controller;
mod phase_type;

pub use compile::{compile, CompiledSmdp};
pub use controller::{lift_policy, FlatController};
pub use phase_type::{analyze_holding, HoldingClass, PhaseTypeAnalysis};

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::io as io_helpers;

/// An option: where it may start, where it stops, and what it plays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
    pub initiation: Vec<usize>,
    /// `(state, β)` pairs; unlisted states never stop the option.
    #[serde(default)]
    pub termination: Vec<(usize, f64)>,
    /// `(state, primitive action)` pairs.
    pub policy: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OptionSet {
    pub options: Vec<OptionSpec>,
}

impl OptionSet {
    pub fn new(options: Vec<OptionSpec>) -> Self {
        OptionSet { options }
    }

    pub fn len(&self) -> usize {
        self.options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.options.is_empty()
    }

    pub fn to_toml_string(&self) -> Result<String> {
        io_helpers::to_toml(self)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        io_helpers::from_toml(text)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        io_helpers::read_toml(path.as_ref())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        io_helpers::write_toml(path.as_ref(), self)
    }
}

/// Dense lookup tables for fast execution of an option set.
#[derive(Debug, Clone)]
pub struct OptionTables {
    beta: Vec<Vec<f64>>,
    policy: Vec<Vec<Option<usize>>>,
}

impl OptionTables {
    pub fn new(options: &OptionSet, num_states: usize) -> Result<Self> {
        let mut beta = Vec::with_capacity(options.len());
        let mut policy = Vec::with_capacity(options.len());
        for (i, o) in options.options.iter().enumerate() {
            let mut b = vec![0.0; num_states];
            for &(s, p) in &o.termination {
                if s >= num_states {
                    return Err(Error::StateOutOfRange(s));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::NotAdmissible(format!("option {i}: termination {p} at state {s}")));
                }
                b[s] = p;
            }
            let mut pi = vec![None; num_states];
            for &(s, a) in &o.policy {
                if s >= num_states {
                    return Err(Error::StateOutOfRange(s));
                }
                pi[s] = Some(a);
            }
            for &s in &o.initiation {
                if s >= num_states {
                    return Err(Error::StateOutOfRange(s));
                }
            }
            beta.push(b);
            policy.push(pi);
        }
        Ok(OptionTables { beta, policy })
    }

    pub fn beta(&self, option: usize, state: usize) -> f64 {
        self.beta[option][state]
    }

    pub fn inner_action(&self, option: usize, state: usize) -> Result<usize> {
        self.policy[option][state].ok_or(Error::UndefinedInnerPolicy { option, state })
    }

    /// Termination draw on arrival at `state`; no randomness is consumed
    /// when β is 0 or 1.
    pub fn terminates<R: Rng + ?Sized>(&self, option: usize, state: usize, rng: &mut R) -> bool {
        let b = self.beta[option][state];
        if b >= 1.0 {
            true
        } else if b <= 0.0 {
            false
        } else {
            rng.random::<f64>() < b
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn option_file_round_trip() {
        let set = OptionSet::new(vec![OptionSpec {
            label: "left".into(),
            initiation: vec![3],
            termination: vec![(2, 0.5), (1, 1.0)],
            policy: vec![(3, 0), (2, 0)],
        }]);
        let text = set.to_toml_string().unwrap();
        assert_eq!(OptionSet::from_toml_str(&text).unwrap(), set);
    }

    #[test]
    fn tables_reject_bad_beta() {
        let set = OptionSet::new(vec![OptionSpec {
            label: String::new(),
            initiation: vec![0],
            termination: vec![(0, 1.5)],
            policy: vec![(0, 0)],
        }]);
        assert!(OptionTables::new(&set, 2).is_err());
    }
}
