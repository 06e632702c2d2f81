//! Experiment plans: a sweep over grid sizes, option lengths and seeds.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::ENVIRONMENT_NAMES;
use crate::error::{Error, Result};
use crate::learning::{Budget, LedgerDetail};
use crate::model::io as io_helpers;

/// Learner settings of one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmConfig {
    pub env: String,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Multiplier on every confidence radius.
    #[serde(default = "one")]
    pub radius_scale: f64,
    /// Extra `key=value` environment parameters.
    #[serde(default)]
    pub params: Vec<String>,
}

fn default_delta() -> f64 {
    0.05
}

fn one() -> f64 {
    1.0
}

impl ArmConfig {
    pub fn new(env: &str) -> Self {
        ArmConfig { env: env.to_string(), delta: default_delta(), radius_scale: 1.0, params: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub out_dir: PathBuf,
    pub d: Vec<usize>,
    /// Option lengths; empty means 1..=⌈2√d⌉ for each d.
    #[serde(default)]
    pub m: Vec<usize>,
    pub seeds: Vec<u64>,
    pub budget: Budget,
    pub primitive: ArmConfig,
    pub options: ArmConfig,
    #[serde(default)]
    pub ledger: LedgerDetail,
    /// Rows per factor of ten in the aggregate.
    #[serde(default = "default_points")]
    pub points_per_decade: u32,
}

fn default_points() -> u32 {
    10
}

/// Radius multiplier of the default plan. With the unscaled radii a 20×20
/// grid is still exploring after 5·10⁶ steps.
pub const DEFAULT_RADIUS_SCALE: f64 = 0.01;

impl Default for ExperimentPlan {
    fn default() -> Self {
        let arm = |env: &str| ArmConfig { radius_scale: DEFAULT_RADIUS_SCALE, ..ArmConfig::new(env) };
        ExperimentPlan {
            out_dir: PathBuf::from("results"),
            d: vec![10, 14, 20],
            m: Vec::new(),
            seeds: (1..=8).collect(),
            budget: Budget::Duration(5e6),
            primitive: arm("grid"),
            options: arm("grid-options"),
            ledger: LedgerDetail::default(),
            points_per_decade: default_points(),
        }
    }
}

impl ExperimentPlan {
    pub fn check(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Validation("a plan needs at least one seed".into()));
        }
        if self.d.is_empty() {
            return Err(Error::Validation("a plan needs at least one grid size".into()));
        }
        for arm in [&self.primitive, &self.options] {
            if !ENVIRONMENT_NAMES.contains(&arm.env.as_str()) {
                return Err(Error::UnknownEnvironment(arm.env.clone()));
            }
        }
        let ok = match self.budget {
            Budget::DecisionSteps(n) => n > 0,
            Budget::Duration(t) => t > 0.0,
        };
        if !ok {
            return Err(Error::Validation("budgets must be positive".into()));
        }
        if self.points_per_decade == 0 {
            return Err(Error::Validation("points_per_decade must be positive".into()));
        }
        Ok(())
    }

    /// Option lengths swept for side `d`.
    pub fn lengths(&self, d: usize) -> Vec<usize> {
        if self.m.is_empty() {
            let top = (2.0 * (d as f64).sqrt()).ceil() as usize;
            (1..=top.min(d - 1)).collect()
        } else {
            self.m.clone()
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        io_helpers::to_toml(self)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let plan: Self = io_helpers::from_toml(text)?;
        plan.check()?;
        Ok(plan)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let plan: Self = io_helpers::read_toml(path.as_ref())?;
        plan.check()?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lengths_and_round_trip() {
        let plan = ExperimentPlan::default();
        assert_eq!(plan.lengths(20), (1..=9).collect::<Vec<_>>());
        assert_eq!(plan.lengths(10), (1..=7).collect::<Vec<_>>());
        let text = plan.to_toml_string().unwrap();
        assert_eq!(ExperimentPlan::from_toml_str(&text).unwrap(), plan);
    }

    #[test]
    fn rejects_bad_plans() {
        let plan = ExperimentPlan { seeds: vec![], ..Default::default() };
        assert!(plan.check().is_err());
        let plan = ExperimentPlan { options: ArmConfig::new("maze"), ..Default::default() };
        assert!(plan.check().is_err());
    }
}
