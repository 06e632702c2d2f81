//! Two-state SMDP families used as hard instances, in their merged form and
//! as a tree of copies.
//!
//! In the general variant rewards and holding times are independent two-point
//! laws; in the options-compatible variant the reward in `s1` equals
//! `r_max · τ`. Only the pair `(a0_star, a1_star)` differs from the others.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActionSpec, Distribution, ModelSpec, Outcome, SmdpModel, StateSpec, TailParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerBoundVariant {
    /// Independent rewards and holding times; `tau_bar` is an input and
    /// `p = tau_bar / t_max`.
    GeneralSmdp,
    /// Reward tied to duration; `p` is an input and
    /// `tau_bar = t_min + p (t_max − t_min)`.
    OptionsCompatible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// Two states with `copies · actions` actions each.
    Merged,
    /// `copies` two-state blocks whose `s0` states are joined by a tree of
    /// deterministic actions. Copy `c` owns states `2c` and `2c + 1`.
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundConfig {
    pub variant: LowerBoundVariant,
    pub layout: Layout,
    pub delta: f64,
    pub epsilon: f64,
    /// Only read by the options-compatible variant.
    pub p: f64,
    pub eta: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Only read by the general variant.
    pub tau_bar: f64,
    pub r_max: f64,
    pub copies: usize,
    pub actions: usize,
    /// Index of the good action in `s0`. In the merged layout it ranges over
    /// all `copies · actions` actions, in the tree layout over one copy.
    pub a0_star: usize,
    pub a1_star: usize,
    /// Copy holding the good actions (tree layout only).
    pub good_copy: usize,
}

impl Default for LowerBoundConfig {
    fn default() -> Self {
        LowerBoundConfig {
            variant: LowerBoundVariant::GeneralSmdp,
            layout: Layout::Merged,
            delta: 0.2,
            epsilon: 0.05,
            p: 0.25,
            eta: 0.1,
            t_min: 1.0,
            t_max: 9.0,
            tau_bar: 2.5,
            r_max: 1.0,
            copies: 1,
            actions: 2,
            a0_star: 0,
            a1_star: 0,
            good_copy: 0,
        }
    }
}

fn bad(msg: String) -> Error {
    Error::Parameters(msg)
}

impl LowerBoundConfig {
    pub fn check(&self) -> Result<()> {
        let c = self;
        if !(c.t_min > 0.0 && c.t_min < c.t_max && c.t_max.is_finite()) {
            return Err(bad(format!("need 0 < t_min < t_max, got [{}, {}]", c.t_min, c.t_max)));
        }
        if !(c.r_max > 0.0) {
            return Err(bad("r_max must be positive".into()));
        }
        if c.copies == 0 || c.actions == 0 {
            return Err(bad("need at least one copy and one action".into()));
        }
        let per_state = match c.layout {
            Layout::Merged => c.copies * c.actions,
            Layout::Tree => c.actions,
        };
        if c.a0_star >= per_state || c.a1_star >= per_state {
            return Err(bad(format!("best actions ({}, {}) out of range {per_state}", c.a0_star, c.a1_star)));
        }
        if c.layout == Layout::Tree && c.good_copy >= c.copies {
            return Err(bad(format!("good copy {} out of range {}", c.good_copy, c.copies)));
        }
        // ε = 0 and η = 0 are accepted so that the symmetric instance can be built
        match c.variant {
            LowerBoundVariant::GeneralSmdp => {
                let p = c.tau_bar / c.t_max;
                if !(c.tau_bar > c.t_min && p <= 1.0 / 3.0) {
                    return Err(bad(format!("need t_min < tau_bar <= t_max / 3, got tau_bar = {}", c.tau_bar)));
                }
                if !(c.delta > 0.0 && c.delta <= 1.0 / 3.0) {
                    return Err(bad(format!("need 0 < delta <= 1/3, got {}", c.delta)));
                }
                if !(c.epsilon >= 0.0 && c.epsilon < c.delta) {
                    return Err(bad(format!("need 0 <= epsilon < delta, got {}", c.epsilon)));
                }
                if !(c.eta >= 0.0 && c.eta < p) {
                    return Err(bad(format!("need 0 <= eta < p = {p}, got {}", c.eta)));
                }
            }
            LowerBoundVariant::OptionsCompatible => {
                if !(c.delta > 0.0 && c.delta < 0.5) {
                    return Err(bad(format!("need 0 < delta < 1/2, got {}", c.delta)));
                }
                if !(c.epsilon >= 0.0 && c.epsilon <= c.delta) {
                    return Err(bad(format!("need 0 <= epsilon <= delta, got {}", c.epsilon)));
                }
                if !(c.p > 0.0 && c.p <= 0.5) {
                    return Err(bad(format!("need 0 < p <= 1/2, got {}", c.p)));
                }
                if !(c.eta >= 0.0 && c.eta <= 1.0 - 2.0 * c.p) {
                    return Err(bad(format!("need 0 <= eta <= 1 - 2p, got {}", c.eta)));
                }
            }
        }
        Ok(())
    }

    /// Mean holding time of the ordinary actions.
    pub fn mean_holding(&self) -> f64 {
        match self.variant {
            LowerBoundVariant::GeneralSmdp => self.tau_bar,
            LowerBoundVariant::OptionsCompatible => self.t_min + self.p * (self.t_max - self.t_min),
        }
    }

    /// Probability of the high reward (general) or of the long holding time
    /// (options-compatible) for ordinary actions.
    pub fn high_probability(&self) -> f64 {
        match self.variant {
            LowerBoundVariant::GeneralSmdp => self.tau_bar / self.t_max,
            LowerBoundVariant::OptionsCompatible => self.p,
        }
    }
}

struct Pair {
    s0: Vec<ActionSpec>,
    s1: Vec<ActionSpec>,
}

/// Actions of one two-state block. `s0`/`s1` are the state indices, `good`
/// names the special actions if this block has them.
fn block(c: &LowerBoundConfig, s0: usize, s1: usize, n: usize, good: Option<(usize, usize)>) -> Pair {
    let q = c.high_probability();
    let mut a0 = Vec::with_capacity(n);
    let mut a1 = Vec::with_capacity(n);
    for a in 0..n {
        let star0 = good.is_some_and(|g| g.0 == a);
        let star1 = good.is_some_and(|g| g.1 == a);
        let go = if star0 { c.delta + c.epsilon } else { c.delta };
        let back = c.delta;
        match c.variant {
            LowerBoundVariant::GeneralSmdp => {
                let tau = Distribution::two_point(c.t_min, c.t_max, (c.tau_bar - c.t_min) / (c.t_max - c.t_min));
                let zero = Distribution::dirac(0.0);
                let high = 0.5 * c.r_max * c.t_max;
                let r = Distribution::two_point(0.0, high, if star1 { q + c.eta } else { q });
                a0.push(ActionSpec::new(vec![
                    Outcome::new(s0, 1.0 - go, zero.clone(), tau.clone()),
                    Outcome::new(s1, go, zero, tau.clone()),
                ]));
                a1.push(ActionSpec::new(vec![
                    Outcome::new(s1, 1.0 - back, r.clone(), tau.clone()),
                    Outcome::new(s0, back, r, tau),
                ]));
            }
            LowerBoundVariant::OptionsCompatible => {
                let tau = Distribution::two_point(c.t_min, c.t_max, q);
                let tau1 = Distribution::two_point(c.t_min, c.t_max, if star1 { q + c.eta } else { q });
                let zero = Distribution::dirac(0.0);
                a0.push(ActionSpec::new(vec![
                    Outcome::new(s0, 1.0 - go, zero.clone(), tau.clone()),
                    Outcome::new(s1, go, zero, tau),
                ]));
                let mut act = ActionSpec::new(vec![
                    Outcome { next: s1, prob: 1.0 - back, reward: None, holding: tau1.clone() },
                    Outcome { next: s0, prob: back, reward: None, holding: tau1 },
                ]);
                act.coupling = Some(c.r_max);
                a1.push(act);
            }
        }
        if star0 {
            let last = a0.len() - 1;
            a0[last].label = "a0*".into();
        }
        if star1 {
            let last = a1.len() - 1;
            a1[last].label = "a1*".into();
        }
    }
    Pair { s0: a0, s1: a1 }
}

fn tree_action(c: &LowerBoundConfig, to: usize, label: String) -> ActionSpec {
    ActionSpec::new(vec![Outcome::fixed(to, 1.0, 0.0, c.t_min)]).labeled(label)
}

pub fn build_lower_bound_smdp(config: &LowerBoundConfig) -> Result<SmdpModel> {
    config.check()?;
    let c = config;
    let mut states = Vec::new();
    match c.layout {
        Layout::Merged => {
            let pair = block(c, 0, 1, c.copies * c.actions, Some((c.a0_star, c.a1_star)));
            states.push(StateSpec { actions: pair.s0 });
            states.push(StateSpec { actions: pair.s1 });
        }
        Layout::Tree => {
            let arity = c.actions;
            for copy in 0..c.copies {
                let (s0, s1) = (2 * copy, 2 * copy + 1);
                let good = (copy == c.good_copy).then_some((c.a0_star, c.a1_star));
                let mut pair = block(c, s0, s1, c.actions, good);
                let parent = if copy == 0 { 0 } else { (copy - 1) / arity };
                pair.s0.push(tree_action(c, 2 * parent, "parent".into()));
                for j in 0..arity {
                    let child = copy * arity + j + 1;
                    let to = if child < c.copies { 2 * child } else { s0 };
                    pair.s0.push(tree_action(c, to, format!("child {j}")));
                }
                states.push(StateSpec { actions: pair.s0 });
                states.push(StateSpec { actions: pair.s1 });
            }
        }
    }
    let means = states.iter().flat_map(|st| st.actions.iter()).map(|a| {
        a.outcomes.iter().map(|o| o.prob * o.holding.mean()).sum::<f64>()
    });
    let (lo, hi) = means.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
    SmdpModel::new(ModelSpec {
        r_max: c.r_max,
        tau_min: lo,
        tau_max: hi,
        tails: Some(TailParams::Bounded { t_min: c.t_min, t_max: c.t_max }),
        states,
    })
}

/// Closed-form optimal gain of the two-state instance.
pub fn lower_bound_optimal_gain(config: &LowerBoundConfig) -> f64 {
    let c = config;
    let tau = c.mean_holding();
    match c.variant {
        LowerBoundVariant::GeneralSmdp => {
            0.5 * c.r_max * (c.delta + c.epsilon) * (tau + c.eta * c.t_max) / ((2.0 * c.delta + c.epsilon) * tau)
        }
        LowerBoundVariant::OptionsCompatible => {
            let extra = c.eta * (c.t_max - c.t_min);
            c.r_max * (c.delta + c.epsilon) * (tau + extra)
                / ((2.0 * c.delta + c.epsilon) * tau + (c.delta + c.epsilon) * extra)
        }
    }
}

/// Closed-form diameter of the two-state instance, `tau_bar / delta`.
pub fn lower_bound_diameter(config: &LowerBoundConfig) -> f64 {
    config.mean_holding() / config.delta
}
