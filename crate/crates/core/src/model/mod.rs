//! Finite SMDP data model: raw specification, validated model, policies and
//! one-step simulation.

mod distribution;
pub(crate) mod io;
mod validate;

pub use distribution::{Distribution, PhaseType, MASS_TOLERANCE};
pub use io::{read_model, write_model};
pub use validate::{validate, ValidationReport, Violation};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Random number generator used by every simulator in the crate.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Tail metadata for rewards and holding times, consumed by the learner's
/// confidence radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailParams {
    SubExponential { sigma_r: f64, b_r: f64, sigma_tau: f64, b_tau: f64 },
    Bounded { t_min: f64, t_max: f64 },
}

/// One branch of a transition: next state, probability and the laws of the
/// reward and holding time collected on the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub next: usize,
    pub prob: f64,
    /// Absent when the action couples reward to holding time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward: Option<Distribution>,
    pub holding: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
    /// When set to `c`, every sampled reward equals `c` times the sampled
    /// holding time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub actions: Vec<ActionSpec>,
}

/// Serializable description of an SMDP. See the README for the file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub r_max: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tails: Option<TailParams>,
    pub states: Vec<StateSpec>,
}

impl Outcome {
    pub fn new(next: usize, prob: f64, reward: Distribution, holding: Distribution) -> Self {
        Outcome { next, prob, reward: Some(reward), holding }
    }

    /// Deterministic reward and holding time.
    pub fn fixed(next: usize, prob: f64, reward: f64, holding: f64) -> Self {
        Outcome::new(next, prob, Distribution::dirac(reward), Distribution::dirac(holding))
    }
}

impl ActionSpec {
    pub fn new(outcomes: Vec<Outcome>) -> Self {
        ActionSpec { label: String::new(), coupling: None, outcomes }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// Result of one simulated transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub next: usize,
    pub reward: f64,
    pub holding: f64,
}

/// A validated finite SMDP with cached expected rewards and holding times.
#[derive(Debug, Clone)]
pub struct SmdpModel {
    spec: ModelSpec,
    r_bar: Vec<Vec<f64>>,
    tau_bar: Vec<Vec<f64>>,
    rows: Vec<Vec<Vec<(usize, f64)>>>,
}

impl SmdpModel {
    /// Validates `spec` and builds the model.
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let report = validate(&spec);
        if !report.is_ok() {
            return Err(Error::Validation(report.to_string()));
        }
        Ok(Self::new_unchecked(spec))
    }

    /// Builds the model without validation. Means of malformed inputs are
    /// whatever the raw formulas produce.
    pub fn new_unchecked(spec: ModelSpec) -> Self {
        let mut r_bar = Vec::with_capacity(spec.states.len());
        let mut tau_bar = Vec::with_capacity(spec.states.len());
        let mut rows = Vec::with_capacity(spec.states.len());
        for st in &spec.states {
            let mut rs = Vec::with_capacity(st.actions.len());
            let mut ts = Vec::with_capacity(st.actions.len());
            let mut ps = Vec::with_capacity(st.actions.len());
            for act in &st.actions {
                let (r, t) = action_means(act);
                rs.push(r);
                ts.push(t);
                ps.push(aggregate_row(&act.outcomes));
            }
            r_bar.push(rs);
            tau_bar.push(ts);
            rows.push(ps);
        }
        SmdpModel { spec, r_bar, tau_bar, rows }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn into_spec(self) -> ModelSpec {
        self.spec
    }

    pub fn num_states(&self) -> usize {
        self.spec.states.len()
    }

    pub fn num_actions(&self, s: usize) -> usize {
        self.spec.states[s].actions.len()
    }

    /// Largest action-set size, the `A` of the confidence radii.
    pub fn max_actions(&self) -> usize {
        self.spec.states.iter().map(|s| s.actions.len()).max().unwrap_or(0)
    }

    pub fn num_pairs(&self) -> usize {
        self.spec.states.iter().map(|s| s.actions.len()).sum()
    }

    pub fn r_max(&self) -> f64 {
        self.spec.r_max
    }

    pub fn tau_min(&self) -> f64 {
        self.spec.tau_min
    }

    pub fn tau_max(&self) -> f64 {
        self.spec.tau_max
    }

    pub fn tails(&self) -> Option<TailParams> {
        self.spec.tails
    }

    pub fn action(&self, s: usize, a: usize) -> &ActionSpec {
        &self.spec.states[s].actions[a]
    }

    fn check(&self, s: usize, a: usize) -> Result<()> {
        if s >= self.num_states() {
            return Err(Error::StateOutOfRange(s));
        }
        if a >= self.num_actions(s) {
            return Err(Error::ActionOutOfRange { state: s, action: a });
        }
        Ok(())
    }

    /// r̄(s,a) = Σ r̄(s,a,s') p(s'|s,a).
    pub fn expected_reward(&self, s: usize, a: usize) -> Result<f64> {
        self.check(s, a)?;
        Ok(self.r_bar[s][a])
    }

    /// τ̄(s,a) = Σ τ̄(s,a,s') p(s'|s,a).
    pub fn expected_holding(&self, s: usize, a: usize) -> Result<f64> {
        self.check(s, a)?;
        Ok(self.tau_bar[s][a])
    }

    /// Unchecked fast path for planners.
    pub fn r_bar(&self, s: usize, a: usize) -> f64 {
        self.r_bar[s][a]
    }

    pub fn tau_bar(&self, s: usize, a: usize) -> f64 {
        self.tau_bar[s][a]
    }

    /// Sparse row p(·|s,a) with one entry per distinct successor, sorted.
    pub fn row(&self, s: usize, a: usize) -> &[(usize, f64)] {
        &self.rows[s][a]
    }

    /// Dense row p(·|s,a).
    pub fn dense_row(&self, s: usize, a: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.num_states()];
        for &(j, w) in self.row(s, a) {
            p[j] += w;
        }
        p
    }

    /// Draws the successor, then the holding time, then the reward.
    pub fn sample_transition<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> Result<Step> {
        self.check(s, a)?;
        Ok(self.sample_unchecked(s, a, rng))
    }

    pub fn sample_unchecked<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> Step {
        let act = &self.spec.states[s].actions[a];
        let outcome = pick_outcome(&act.outcomes, rng);
        let holding = outcome.holding.sample(rng);
        let reward = match (act.coupling, &outcome.reward) {
            (Some(c), _) => c * holding,
            (None, Some(r)) => r.sample(rng),
            (None, None) => 0.0,
        };
        Step { next: outcome.next, reward, holding }
    }

    /// Whether every holding time is deterministically one.
    pub fn is_mdp(&self) -> bool {
        self.spec
            .states
            .iter()
            .flat_map(|s| &s.actions)
            .flat_map(|a| &a.outcomes)
            .all(|o| o.holding.is_degenerate_at(1.0))
    }
}

fn pick_outcome<'a, R: Rng + ?Sized>(outcomes: &'a [Outcome], rng: &mut R) -> &'a Outcome {
    if outcomes.len() == 1 {
        return &outcomes[0];
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for o in outcomes {
        acc += o.prob;
        if u < acc {
            return o;
        }
    }
    outcomes.iter().rev().find(|o| o.prob > 0.0).unwrap_or(&outcomes[outcomes.len() - 1])
}

fn action_means(act: &ActionSpec) -> (f64, f64) {
    let mut r = 0.0;
    let mut t = 0.0;
    for o in &act.outcomes {
        let tm = o.holding.mean();
        let rm = match (act.coupling, &o.reward) {
            (Some(c), _) => c * tm,
            (None, Some(d)) => d.mean(),
            (None, None) => 0.0,
        };
        r += o.prob * rm;
        t += o.prob * tm;
    }
    (r, t)
}

fn aggregate_row(outcomes: &[Outcome]) -> Vec<(usize, f64)> {
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(outcomes.len());
    let mut sorted: Vec<&Outcome> = outcomes.iter().collect();
    sorted.sort_by_key(|o| o.next);
    for o in sorted {
        match row.last_mut() {
            Some((j, w)) if *j == o.next => *w += o.prob,
            _ => row.push((o.next, o.prob)),
        }
    }
    row
}

/// An SMDP whose holding times are all deterministically one.
#[derive(Debug, Clone)]
pub struct MdpModel(SmdpModel);

impl MdpModel {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        Self::from_smdp(SmdpModel::new(spec)?)
    }

    pub fn from_smdp(model: SmdpModel) -> Result<Self> {
        if !model.is_mdp() {
            return Err(Error::Validation("holding times must be degenerate at 1".into()));
        }
        Ok(MdpModel(model))
    }

    pub fn smdp(&self) -> &SmdpModel {
        &self.0
    }

    pub fn into_smdp(self) -> SmdpModel {
        self.0
    }
}

impl std::ops::Deref for MdpModel {
    type Target = SmdpModel;
    fn deref(&self) -> &SmdpModel {
        &self.0
    }
}

/// Stationary deterministic policy: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StationaryPolicy {
    pub choice: Vec<usize>,
}

impl StationaryPolicy {
    pub fn new(choice: Vec<usize>) -> Self {
        StationaryPolicy { choice }
    }

    pub fn check(&self, model: &SmdpModel) -> Result<()> {
        if self.choice.len() != model.num_states() {
            return Err(Error::Validation(format!(
                "policy covers {} states, model has {}",
                self.choice.len(),
                model.num_states()
            )));
        }
        for (s, &a) in self.choice.iter().enumerate() {
            if a >= model.num_actions(s) {
                return Err(Error::ActionOutOfRange { state: s, action: a });
            }
        }
        Ok(())
    }

    /// Every stationary deterministic policy of `model`, in lexicographic order.
    pub fn enumerate(model: &SmdpModel) -> impl Iterator<Item = StationaryPolicy> + '_ {
        let sizes: Vec<usize> = (0..model.num_states()).map(|s| model.num_actions(s)).collect();
        let total: usize = sizes.iter().product();
        (0..total).map(move |mut idx| {
            let mut choice = vec![0; sizes.len()];
            for s in (0..sizes.len()).rev() {
                choice[s] = idx % sizes[s];
                idx /= sizes[s];
            }
            StationaryPolicy { choice }
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::SeedableRng;

    /// Two states, two actions each, mixed reward and holding laws.
    pub fn two_state_spec() -> ModelSpec {
        ModelSpec {
            r_max: 2.0,
            tau_min: 1.0,
            tau_max: 4.0,
            tails: None,
            states: vec![
                StateSpec {
                    actions: vec![
                        ActionSpec::new(vec![
                            Outcome::fixed(0, 0.5, 0.0, 1.0),
                            Outcome::fixed(1, 0.5, 2.0, 3.0),
                        ]),
                        ActionSpec::new(vec![Outcome::new(
                            1,
                            1.0,
                            Distribution::two_point(0.0, 4.0, 0.5),
                            Distribution::two_point(1.0, 3.0, 0.5),
                        )]),
                    ],
                },
                StateSpec {
                    actions: vec![ActionSpec::new(vec![Outcome::fixed(0, 1.0, 1.0, 1.0)])],
                },
            ],
        }
    }

    #[test]
    fn expected_values_by_linearity() {
        let m = SmdpModel::new(two_state_spec()).unwrap();
        assert_eq!(m.expected_reward(0, 0).unwrap(), 1.0);
        assert_eq!(m.expected_holding(0, 0).unwrap(), 2.0);
        assert_eq!(m.expected_reward(0, 1).unwrap(), 2.0);
        assert_eq!(m.expected_holding(1, 0).unwrap(), 1.0);
        assert!(matches!(m.expected_reward(1, 1), Err(Error::ActionOutOfRange { .. })));
    }

    #[test]
    fn single_transition_reward() {
        let spec = ModelSpec {
            r_max: 3.0,
            tau_min: 1.0,
            tau_max: 1.0,
            tails: None,
            states: vec![StateSpec { actions: vec![ActionSpec::new(vec![Outcome::fixed(0, 1.0, 3.0, 1.0)])] }],
        };
        let m = SmdpModel::new(spec).unwrap();
        assert_eq!(m.expected_reward(0, 0).unwrap(), 3.0);
        assert!(m.is_mdp());
    }

    #[test]
    fn deterministic_sampling_and_replay() {
        let m = SmdpModel::new(two_state_spec()).unwrap();
        let mut rng = SimRng::seed_from_u64(3);
        let step = m.sample_transition(1, 0, &mut rng).unwrap();
        assert_eq!(step, Step { next: 0, reward: 1.0, holding: 1.0 });
        let draw = |seed| {
            let mut rng = SimRng::seed_from_u64(seed);
            (0..20).map(|_| m.sample_unchecked(0, 1, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
    }

    #[test]
    fn coupled_reward_follows_holding() {
        let mut spec = two_state_spec();
        spec.states[0].actions[1].coupling = Some(0.5);
        spec.states[0].actions[1].outcomes[0].reward = None;
        let m = SmdpModel::new(spec).unwrap();
        assert_eq!(m.r_bar(0, 1), 1.0);
        let mut rng = SimRng::seed_from_u64(1);
        for _ in 0..100 {
            let st = m.sample_unchecked(0, 1, &mut rng);
            assert_eq!(st.reward, 0.5 * st.holding);
        }
    }

    #[test]
    fn policy_enumeration_counts() {
        let m = SmdpModel::new(two_state_spec()).unwrap();
        let all: Vec<_> = StationaryPolicy::enumerate(&m).collect();
        assert_eq!(all.len(), 2);
        assert!(all.iter().all(|p| p.check(&m).is_ok()));
        assert!(StationaryPolicy::new(vec![0, 1]).check(&m).is_err());
    }
}
