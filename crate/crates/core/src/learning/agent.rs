//! The optimistic learner: episodes of extended value iteration on the
//! plausible set, each run until some pair doubles its visit count.

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::{ConfidencePolicy, Counters, LedgerDetail, RegretLedger};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::model::SimRng;
use crate::planning::{extended_value_iteration_with, BoundedParameterSmdp, EviOptions, EviSolution, MAX_SWEEPS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub confidence: ConfidencePolicy,
    /// Aperiodicity parameter of the equivalent MDP; 0.9·τ_min when absent.
    pub tau_param: Option<f64>,
    pub seed: u64,
    pub initial_state: usize,
    pub max_sweeps: u64,
}

impl AgentConfig {
    pub fn new(confidence: ConfidencePolicy, seed: u64) -> Self {
        AgentConfig { confidence, tau_param: None, seed, initial_state: 0, max_sweeps: MAX_SWEEPS }
    }

    pub fn tau_param(&self) -> f64 {
        self.tau_param.unwrap_or(0.9 * self.confidence.tau_min)
    }
}

/// When a run stops: after a number of decisions, or once the elapsed time
/// reaches a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Budget {
    DecisionSteps(u64),
    Duration(f64),
}

impl Budget {
    pub fn exhausted(&self, ledger: &RegretLedger) -> bool {
        match *self {
            Budget::DecisionSteps(n) => ledger.steps() >= n,
            Budget::Duration(t) => ledger.duration() >= t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    pub k: u64,
    /// Decision-step index at the start of the episode.
    pub i_k: u64,
    pub steps: u64,
    pub evi_iterations: u64,
    /// Gain ρ̃_k of the optimistic policy.
    pub optimistic_gain: f64,
    pub epsilon: f64,
    /// Pair whose count doubled, `None` when the budget ran out first.
    pub trigger: Option<(usize, usize)>,
}

/// Hook called after planning, before the episode runs.
pub trait EpisodeObserver {
    fn planned(&mut self, k: u64, plausible: &BoundedParameterSmdp, solution: &EviSolution, epsilon: f64);
}

impl EpisodeObserver for () {
    fn planned(&mut self, _: u64, _: &BoundedParameterSmdp, _: &EviSolution, _: f64) {}
}

impl<F: FnMut(u64, &BoundedParameterSmdp, &EviSolution, f64)> EpisodeObserver for F {
    fn planned(&mut self, k: u64, plausible: &BoundedParameterSmdp, solution: &EviSolution, epsilon: f64) {
        self(k, plausible, solution, epsilon)
    }
}

#[derive(Debug, Clone)]
pub struct UcrlSmdp {
    config: AgentConfig,
    counters: Counters,
    state: usize,
    rng: SimRng,
}

impl UcrlSmdp {
    pub fn new(config: AgentConfig, actions_per_state: &[usize]) -> Result<Self> {
        config.confidence.check()?;
        if config.initial_state >= actions_per_state.len() {
            return Err(Error::StateOutOfRange(config.initial_state));
        }
        if actions_per_state.contains(&0) {
            return Err(Error::Validation("every state needs an action".into()));
        }
        let tau = config.tau_param();
        if !(tau > 0.0 && tau < config.confidence.tau_min) {
            return Err(Error::TauParam { tau, tau_min: config.confidence.tau_min });
        }
        Ok(UcrlSmdp {
            config,
            counters: Counters::new(actions_per_state),
            state: config.initial_state,
            rng: SimRng::seed_from_u64(config.seed),
        })
    }

    /// Agent for `env`'s state and action layout.
    pub fn for_env(config: AgentConfig, env: &impl Environment) -> Result<Self> {
        let shape: Vec<usize> = (0..env.num_states()).map(|s| env.num_actions(s)).collect();
        Self::new(config, &shape)
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn state(&self) -> usize {
        self.state
    }

    /// Empirical centres and radii at the current step.
    pub fn plausible_set(&self) -> BoundedParameterSmdp {
        let c = &self.counters;
        let pol = &self.config.confidence;
        let (ns, na) = (c.num_states(), c.max_actions());
        let i_k = c.i;
        let mut out = BoundedParameterSmdp {
            r_hat: Vec::with_capacity(ns),
            tau_hat: Vec::with_capacity(ns),
            p_hat: Vec::with_capacity(ns),
            beta_r: Vec::with_capacity(ns),
            beta_tau: Vec::with_capacity(ns),
            beta_p: Vec::with_capacity(ns),
            r_max: pol.r_max,
            tau_min: pol.tau_min,
            tau_max: pol.tau_max,
        };
        for s in 0..ns {
            let count = c.num_actions(s);
            let (mut rh, mut th, mut ph) = (Vec::with_capacity(count), Vec::with_capacity(count), Vec::with_capacity(count));
            let (mut br, mut bt, mut bp) = (Vec::with_capacity(count), Vec::with_capacity(count), Vec::with_capacity(count));
            for a in 0..count {
                let idx = c.pair(s, a);
                let n = c.n[idx];
                let nn = n.max(1) as f64;
                if n == 0 {
                    rh.push(0.0);
                    th.push(0.0);
                    ph.push(Vec::new());
                } else {
                    rh.push(c.reward[idx] / nn);
                    th.push(c.holding[idx] / nn);
                    ph.push(c.transitions[idx].iter().map(|&(j, k)| (j, k as f64 / nn)).collect());
                }
                let (r, t, p) = pol.radii(ns, na, i_k, n);
                br.push(r);
                bt.push(t);
                bp.push(p);
            }
            out.r_hat.push(rh);
            out.tau_hat.push(th);
            out.p_hat.push(ph);
            out.beta_r.push(br);
            out.beta_tau.push(bt);
            out.beta_p.push(bp);
        }
        out
    }

    /// Plans on the plausible set, then acts greedily until a pair doubles
    /// its count or the budget is spent.
    pub fn run_episode(
        &mut self,
        env: &mut impl Environment,
        ledger: &mut RegretLedger,
        budget: Budget,
        observer: &mut impl EpisodeObserver,
    ) -> Result<EpisodeSummary> {
        let i_k = self.counters.i;
        self.counters.k += 1;
        let k = self.counters.k;
        let plausible = self.plausible_set();
        let epsilon = self.config.confidence.r_max / (i_k as f64).sqrt();
        let opts = EviOptions { max_sweeps: Some(self.config.max_sweeps), ..Default::default() };
        let solution = extended_value_iteration_with(&plausible, self.config.tau_param(), epsilon, &opts)
            .map_err(|e| match e {
                Error::IterationCap(cap) => {
                    Error::RunAbort(format!("episode {k} at step {i_k}: value iteration hit the cap of {cap} sweeps"))
                }
                other => other,
            })?;
        observer.planned(k, &plausible, &solution, epsilon);
        let policy = &solution.policy.choice;
        let ns = self.counters.num_states();
        let mut steps = 0;
        let mut trigger = None;
        loop {
            if budget.exhausted(ledger) {
                break;
            }
            let s = self.state;
            let a = policy[s];
            let idx = self.counters.pair(s, a);
            if self.counters.nu[idx] >= self.counters.n[idx].max(1) {
                trigger = Some((s, a));
                break;
            }
            let step = env.step(s, a, &mut self.rng)?;
            if step.next >= ns {
                return Err(Error::RunAbort(format!("environment moved to state {} outside 0..{ns}", step.next)));
            }
            self.counters.record(s, a, step.next, step.reward, step.holding);
            ledger.push(s, a, step.holding, step.reward)?;
            self.state = step.next;
            steps += 1;
        }
        self.counters.close_episode();
        Ok(EpisodeSummary {
            k,
            i_k,
            steps,
            evi_iterations: solution.iterations,
            optimistic_gain: solution.gain,
            epsilon,
            trigger,
        })
    }

    /// Runs episodes until the budget is spent.
    pub fn run(
        &mut self,
        env: &mut impl Environment,
        ledger: &mut RegretLedger,
        budget: Budget,
        observer: &mut impl EpisodeObserver,
    ) -> Result<Vec<EpisodeSummary>> {
        let mut episodes = Vec::new();
        while !budget.exhausted(ledger) {
            episodes.push(self.run_episode(env, ledger, budget, observer)?);
        }
        Ok(episodes)
    }
}

/// Output of a complete run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub ledger: RegretLedger,
    pub episodes: Vec<EpisodeSummary>,
}

/// Learns on `env` until `budget` is spent, measuring regret against
/// `rho_star`.
pub fn run(
    config: AgentConfig,
    env: &mut impl Environment,
    budget: Budget,
    rho_star: f64,
    detail: LedgerDetail,
) -> Result<RunOutput> {
    match budget {
        Budget::DecisionSteps(0) => return Err(Error::Parameters("step budget must be at least 1".into())),
        Budget::Duration(t) if !(t > 0.0) => return Err(Error::Parameters("time budget must be positive".into())),
        _ => {}
    }
    let mut agent = UcrlSmdp::for_env(config, env)?;
    let mut ledger = RegretLedger::new(rho_star, detail);
    let episodes = agent.run(env, &mut ledger, budget, &mut ())?;
    Ok(RunOutput { ledger, episodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{build_grid_mdp, grid_optimal_gain, GridConfig, ModelEnv};
    use crate::learning::{PlainUcrl, RadiusMode};
    use crate::model::tests::two_state_spec;
    use crate::model::SmdpModel;

    fn grid_config(seed: u64) -> (SmdpModel, AgentConfig) {
        let grid = build_grid_mdp(&GridConfig::new(4, 1)).unwrap().into_smdp();
        let pol = ConfidencePolicy::for_model(&grid, 0.05).with_mode(RadiusMode::Bounded { t_min: 1.0, t_max: 1.0 });
        (grid, AgentConfig::new(pol, seed))
    }

    #[test]
    fn unit_holding_matches_plain_learner() {
        let (grid, cfg) = grid_config(11);
        let rho = grid_optimal_gain(4, 1.0);
        let out = run(cfg, &mut ModelEnv::new(&grid), Budget::DecisionSteps(3000), rho, LedgerDetail::Full).unwrap();
        let plain = PlainUcrl::new(0.05, 1.0, 11).run(&mut ModelEnv::new(&grid), 3000, rho).unwrap();
        assert_eq!(out.ledger.actions(), plain.actions());
        assert_eq!(out.ledger.regret(), plain.regret());
    }

    #[test]
    fn fixed_seed_replays() {
        let (grid, cfg) = grid_config(3);
        let a = run(cfg, &mut ModelEnv::new(&grid), Budget::DecisionSteps(500), 0.1, LedgerDetail::Full).unwrap();
        let b = run(cfg, &mut ModelEnv::new(&grid), Budget::DecisionSteps(500), 0.1, LedgerDetail::Full).unwrap();
        assert_eq!(a.ledger, b.ledger);
        assert_eq!(a.episodes, b.episodes);
    }

    #[test]
    fn doubling_and_bootstrap() {
        let model = SmdpModel::new(two_state_spec()).unwrap();
        let cfg = AgentConfig::new(ConfidencePolicy::for_model(&model, 0.1), 5);
        let mut env = ModelEnv::new(&model);
        let mut agent = UcrlSmdp::for_env(cfg, &env).unwrap();
        let mut ledger = RegretLedger::new(0.0, LedgerDetail::Full);
        let first = agent.run_episode(&mut env, &mut ledger, Budget::DecisionSteps(u64::MAX), &mut ()).unwrap();
        assert_eq!(first.steps, 1);
        for _ in 0..20 {
            let before = agent.counters().n.clone();
            let ep = agent.run_episode(&mut env, &mut ledger, Budget::DecisionSteps(u64::MAX), &mut ()).unwrap();
            let c = agent.counters();
            let (s, a) = ep.trigger.unwrap();
            let idx = c.pair(s, a);
            assert_eq!(c.n[idx] - before[idx], before[idx].max(1));
            for j in 0..before.len() {
                assert!(c.n[j] - before[j] <= before[j].max(1));
            }
        }
        assert_eq!(agent.counters().i, 1 + agent.counters().total());
        assert_eq!(ledger.steps(), agent.counters().total());
    }

    #[test]
    fn duration_budget_stops_on_time() {
        let model = SmdpModel::new(two_state_spec()).unwrap();
        let cfg = AgentConfig::new(ConfidencePolicy::for_model(&model, 0.1), 2);
        let out = run(cfg, &mut ModelEnv::new(&model), Budget::Duration(200.0), 0.5, LedgerDetail::Full).unwrap();
        let t = out.ledger.duration();
        assert!((200.0..204.0).contains(&t));
        let recs = out.ledger.records();
        let sum: f64 = recs.iter().map(|r| r.tau).sum();
        assert_eq!(sum, t);
        assert!(recs.windows(2).all(|w| w[1].tn > w[0].tn));
    }
}
