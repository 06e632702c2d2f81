//! Batch experiments on the grid: runs every (arm, d, m, seed), stores one
//! ledger per run and reduces them to regret ratios at matched durations.

mod aggregate;
mod plan;
mod theory;

pub use aggregate::{
    aggregate_cell, emit_csv, emit_csv_to, emit_theory_csv, emit_warnings, read_aggregate, read_aggregate_from, time_grid,
    AggregateResult, AggregateRow, Cell, Warning, AGGREGATE_HEADER, THEORY_HEADER, WARNING_HEADER,
};
pub use plan::{ArmConfig, ExperimentPlan, DEFAULT_RADIUS_SCALE};
pub use theory::{best_option_length, theoretical_ratio};

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::env::{build_environment, BuiltEnvironment, EnvParams};
use crate::error::{Error, Result};
use crate::learning::{read_ledger, regret_decomposition, AgentConfig, ConfidencePolicy, LedgerRow, RegretLedger, UcrlSmdp};
use crate::planning::{default_tau, uniformize, value_iteration};

/// Coordinates of a single run. Primitive runs carry no option length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunKey {
    pub d: usize,
    pub m: Option<usize>,
    pub seed: u64,
}

impl RunKey {
    pub fn ledger_name(&self) -> String {
        match self.m {
            Some(m) => format!("options_d{}_m{}_seed{}.csv", self.d, m, self.seed),
            None => format!("primitive_d{}_seed{}.csv", self.d, self.seed),
        }
    }
}

impl fmt::Display for RunKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.m {
            Some(m) => write!(f, "options d={} m={} seed={}", self.d, m, self.seed),
            None => write!(f, "primitive d={} seed={}", self.d, self.seed),
        }
    }
}

/// Totals of one finished run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub key: RunKey,
    pub steps: u64,
    pub duration: f64,
    pub regret: f64,
    pub episodes: usize,
    /// Residual of the regret decomposition; zero for primitive runs.
    pub decomposition_residual: f64,
    /// T_n (ρ*(M) − ρ*(M_O)); zero for primitive runs.
    pub linear_term: f64,
}

struct Prepared {
    env: BuiltEnvironment,
    /// Optimal gain of the decision-level model, from the planner.
    rho_decision: f64,
}

fn prepare(arm: &ArmConfig, d: usize, m: Option<usize>) -> Result<Prepared> {
    let base = EnvParams { d, m: m.unwrap_or(1), ..Default::default() };
    let params = base.with_overrides(&arm.params)?;
    let env = build_environment(&arm.env, &params)?;
    let rho_decision = if env.is_lifted() {
        let eq = uniformize(&env.model, default_tau(&env.model))?;
        value_iteration(&eq, 1e-10)?.gain
    } else {
        env.optimal_gain
    };
    Ok(Prepared { env, rho_decision })
}

/// Runs one arm and returns its ledger and summary.
pub fn execute_run(
    arm: &ArmConfig,
    env: &BuiltEnvironment,
    rho_decision: f64,
    key: RunKey,
    plan: &ExperimentPlan,
) -> Result<(RegretLedger, RunSummary)> {
    let confidence = ConfidencePolicy::for_model(&env.model, arm.delta).with_scale(arm.radius_scale);
    let config = AgentConfig::new(confidence, key.seed);
    let mut sim = env.simulator()?;
    let mut agent = UcrlSmdp::for_env(config, &sim)?;
    let mut ledger = RegretLedger::new(env.optimal_gain, plan.ledger);
    let episodes = agent.run(&mut sim, &mut ledger, plan.budget, &mut ())?;
    let (residual, linear) = match sim.primitive_reward() {
        Some(primitive) => {
            let dec = regret_decomposition(env.optimal_gain, rho_decision, &ledger, primitive)?;
            (dec.residual(), dec.linear_term)
        }
        None => (0.0, 0.0),
    };
    let summary = RunSummary {
        key,
        steps: ledger.steps(),
        duration: ledger.duration(),
        regret: ledger.regret(),
        episodes: episodes.len(),
        decomposition_residual: residual,
        linear_term: linear,
    };
    Ok((ledger, summary))
}

/// Every run of the plan, primitive runs first, in a fixed order.
pub fn run_keys(plan: &ExperimentPlan) -> Vec<RunKey> {
    let mut keys = Vec::new();
    for &d in &plan.d {
        for &seed in &plan.seeds {
            keys.push(RunKey { d, m: None, seed });
        }
        for m in plan.lengths(d) {
            for &seed in &plan.seeds {
                keys.push(RunKey { d, m: Some(m), seed });
            }
        }
    }
    keys
}

fn ledger_dir(plan: &ExperimentPlan) -> PathBuf {
    plan.out_dir.join("ledgers")
}

/// Executes every run on `jobs` worker threads, writes the ledgers, then
/// aggregates them from disk. Output files do not depend on `jobs`.
pub fn run_plan(plan: &ExperimentPlan, jobs: usize) -> Result<(AggregateResult, Vec<RunSummary>)> {
    plan.check()?;
    std::fs::create_dir_all(ledger_dir(plan))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::RunAbort(e.to_string()))?;
    let summaries = pool.install(|| -> Result<Vec<RunSummary>> {
        let mut envs: Vec<((usize, Option<usize>), ArmConfig)> = Vec::new();
        for &d in &plan.d {
            envs.push(((d, None), plan.primitive.clone()));
            for m in plan.lengths(d) {
                envs.push(((d, Some(m)), plan.options.clone()));
            }
        }
        let prepared: BTreeMap<(usize, Option<usize>), Prepared> = envs
            .par_iter()
            .map(|((d, m), arm)| {
                prepare(arm, *d, *m)
                    .map(|p| ((*d, *m), p))
                    .map_err(|e| Error::RunAbort(format!("building {} d={d} m={m:?}: {e}", arm.env)))
            })
            .collect::<Result<_>>()?;
        run_keys(plan)
            .par_iter()
            .map(|&key| {
                let arm = if key.m.is_some() { &plan.options } else { &plan.primitive };
                let prep = &prepared[&(key.d, key.m)];
                let (ledger, summary) = execute_run(arm, &prep.env, prep.rho_decision, key, plan)
                    .map_err(|e| Error::RunAbort(format!("{key}: {e}")))?;
                ledger.write_csv(ledger_dir(plan).join(key.ledger_name()))?;
                log::info!("{key}: n = {} T_n = {} regret = {:.1}", summary.steps, summary.duration, summary.regret);
                Ok(summary)
            })
            .collect()
    })?;
    write_run_summaries(&summaries, plan.out_dir.join("runs.csv"))?;
    let result = aggregate_dir(plan)?;
    emit_csv(&result, plan.out_dir.join("aggregate.csv"))?;
    emit_theory_csv(&result, plan.out_dir.join("theory.csv"))?;
    emit_warnings(&result, plan.out_dir.join("warnings.csv"))?;
    Ok((result, summaries))
}

fn write_run_summaries(summaries: &[RunSummary], path: impl AsRef<Path>) -> Result<()> {
    use crate::learning::fmt17;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["d", "m", "seed", "n", "Tn", "regret", "episodes", "linear_term", "decomposition_residual"])?;
    for s in summaries {
        w.write_record([
            s.key.d.to_string(),
            s.key.m.map_or_else(String::new, |m| m.to_string()),
            s.key.seed.to_string(),
            s.steps.to_string(),
            fmt17(s.duration),
            fmt17(s.regret),
            s.episodes.to_string(),
            fmt17(s.linear_term),
            fmt17(s.decomposition_residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Rebuilds the aggregate from the ledger files under the plan's output
/// directory.
pub fn aggregate_dir(plan: &ExperimentPlan) -> Result<AggregateResult> {
    let dir = ledger_dir(plan);
    let mut result = AggregateResult::default();
    for &d in &plan.d {
        let primitive: Vec<Vec<LedgerRow>> = plan
            .seeds
            .iter()
            .map(|&seed| read_ledger(dir.join(RunKey { d, m: None, seed }.ledger_name())))
            .collect::<Result<_>>()?;
        for m in plan.lengths(d) {
            let options: Vec<Vec<LedgerRow>> = plan
                .seeds
                .iter()
                .map(|&seed| read_ledger(dir.join(RunKey { d, m: Some(m), seed }.ledger_name())))
                .collect::<Result<_>>()?;
            let cell = Cell {
                d,
                m,
                options: options.iter().map(Vec::as_slice).collect(),
                primitive: primitive.iter().map(Vec::as_slice).collect(),
            };
            aggregate_cell(&cell, plan.points_per_decade, &mut result)?;
        }
    }
    for w in &result.warnings {
        log::warn!("d={} m={} Tn={}: {}", w.d, w.m, w.tn, w.message);
    }
    Ok(result)
}
