//! Empirical failure rate of the confidence sets on a known model.

use super::{AgentConfig, Budget, LedgerDetail, RegretLedger, UcrlSmdp};
use crate::env::ModelEnv;
use crate::error::Result;
use crate::model::SmdpModel;
use crate::planning::{BoundedParameterSmdp, EviSolution};

/// Episodes simulated per independent run.
pub const EPISODES_PER_RUN: u64 = 25;

/// Fraction of episodes whose plausible set misses the true means of
/// `model`. Independent runs with seeds `config.seed`, `config.seed + 1`,
/// ... are chained until `episodes` episodes have been planned.
pub fn coverage_test(model: &SmdpModel, config: &AgentConfig, episodes: u64) -> Result<f64> {
    let mut planned = 0u64;
    let mut missed = 0u64;
    let mut run = 0u64;
    while planned < episodes {
        let cfg = AgentConfig { seed: config.seed.wrapping_add(run), ..*config };
        let mut env = ModelEnv::new(model);
        let mut agent = UcrlSmdp::for_env(cfg, &env)?;
        let mut ledger = RegretLedger::new(0.0, LedgerDetail::Checkpoints { dense_until: 0, per_decade: 1 });
        let per_run = EPISODES_PER_RUN.min(episodes - planned);
        let mut check = |_: u64, set: &BoundedParameterSmdp, _: &EviSolution, _: f64| {
            if !set.contains(model) {
                missed += 1;
            }
        };
        for _ in 0..per_run {
            agent.run_episode(&mut env, &mut ledger, Budget::DecisionSteps(u64::MAX), &mut check)?;
        }
        planned += per_run;
        run += 1;
    }
    Ok(missed as f64 / planned as f64)
}
