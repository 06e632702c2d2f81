use super::phase_type::{analyze_indexed, HoldingClass};
use super::OptionSet;
use crate::error::{Error, Result};
use crate::model::{ActionSpec, Distribution, MdpModel, ModelSpec, Outcome, SmdpModel, StateSpec, TailParams};

/// The SMDP induced by an option set, with the maps back to the base MDP.
#[derive(Debug, Clone)]
pub struct CompiledSmdp {
    pub model: SmdpModel,
    /// Base state of every compiled state.
    pub states: Vec<usize>,
    /// Compiled index of every base state, if it belongs to the option state set.
    pub index_of: Vec<Option<usize>>,
    /// Option indices available at every compiled state, in action order.
    pub options_at: Vec<Vec<usize>>,
}

impl CompiledSmdp {
    pub fn option(&self, compiled_state: usize, action: usize) -> usize {
        self.options_at[compiled_state][action]
    }
}

/// Collapses a law whose support is a single point.
fn simplify(ph: crate::model::PhaseType) -> Distribution {
    let d = Distribution::PhaseType(ph);
    match d.support_bounds() {
        Some((lo, hi)) if lo == hi => Distribution::dirac(lo),
        _ => d,
    }
}

/// Compiles `base` plus an admissible option set into the induced SMDP.
///
/// Transition probabilities come from absorption probabilities of each
/// option's absorbing chain; holding times and cumulative rewards are stored
/// as phase-type laws conditioned on the end state. Rewards along the way
/// enter through their means r̄(s,a,s').
pub fn compile(base: &MdpModel, options: &OptionSet) -> Result<CompiledSmdp> {
    let n = base.num_states();
    let tables = super::OptionTables::new(options, n)?;
    let mut in_initiation = vec![false; n];
    for o in &options.options {
        for &s in &o.initiation {
            in_initiation[s] = true;
        }
    }
    for (i, o) in options.options.iter().enumerate() {
        for &(s, b) in &o.termination {
            if b > 0.0 && !in_initiation[s] {
                return Err(Error::NotAdmissible(format!("option {i} may stop at state {s} where no option starts")));
            }
        }
    }
    let states: Vec<usize> = (0..n).filter(|&s| in_initiation[s]).collect();
    let mut index_of = vec![None; n];
    for (k, &s) in states.iter().enumerate() {
        index_of[s] = Some(k);
    }

    let mut spec_states = Vec::with_capacity(states.len());
    let mut options_at = Vec::with_capacity(states.len());
    let mut all_bounded = true;
    let (mut t_lo, mut t_hi) = (f64::INFINITY, 0.0f64);
    for &s in &states {
        let mut actions = Vec::new();
        let mut here = Vec::new();
        for (i, o) in options.options.iter().enumerate() {
            if !o.initiation.contains(&s) {
                continue;
            }
            let a0 = tables.inner_action(i, s)?;
            if a0 >= base.num_actions(s) {
                return Err(Error::ActionOutOfRange { state: s, action: a0 });
            }
            let one_step = base.row(s, a0).iter().all(|&(y, p)| p <= 0.0 || tables.beta(i, y) >= 1.0);
            let mut outcomes = Vec::new();
            if one_step {
                // a primitive action in disguise: keep the base laws as they are
                for out in &base.action(s, a0).outcomes {
                    let mut o2 = out.clone();
                    o2.next = index_of[out.next].ok_or(Error::LeavesOptionStates { option: i, state: out.next })?;
                    if let (Some(c), None) = (base.action(s, a0).coupling, &o2.reward) {
                        o2.reward = Some(Distribution::dirac(c * out.holding.mean()));
                    }
                    outcomes.push(o2);
                }
                t_lo = t_lo.min(1.0);
                t_hi = t_hi.max(1.0);
            } else {
                let ph = analyze_indexed(base, o, i, s)?;
                for &x in &ph.phase_states[1..] {
                    if !in_initiation[x] {
                        return Err(Error::LeavesOptionStates { option: i, state: x });
                    }
                }
                let total: f64 = ph.absorption.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::NonTerminating { option: i, radius: ph.spectral_radius });
                }
                if ph.classification == HoldingClass::SubExponentialUnbounded {
                    all_bounded = false;
                }
                for (j, &y) in ph.end_states.iter().enumerate() {
                    let holding = simplify(ph.holding_law(j));
                    if let Some((lo, hi)) = holding.support_bounds() {
                        t_lo = t_lo.min(lo);
                        t_hi = t_hi.max(hi);
                    }
                    outcomes.push(Outcome {
                        next: index_of[y].ok_or(Error::LeavesOptionStates { option: i, state: y })?,
                        prob: ph.absorption[j] / total,
                        reward: Some(simplify(ph.reward_law(j))),
                        holding,
                    });
                }
            }
            actions.push(ActionSpec::new(outcomes).labeled(o.label.clone()));
            here.push(i);
        }
        spec_states.push(StateSpec { actions });
        options_at.push(here);
    }

    let raw = SmdpModel::new_unchecked(ModelSpec {
        r_max: base.r_max(),
        tau_min: 1.0,
        tau_max: 1.0,
        tails: None,
        states: spec_states,
    });
    let (mut tau_min, mut tau_max) = (f64::INFINITY, 0.0f64);
    for s in 0..raw.num_states() {
        for a in 0..raw.num_actions(s) {
            tau_min = tau_min.min(raw.tau_bar(s, a));
            tau_max = tau_max.max(raw.tau_bar(s, a));
        }
    }
    let mut spec = raw.into_spec();
    spec.tau_min = tau_min;
    spec.tau_max = tau_max;
    spec.tails = all_bounded.then_some(TailParams::Bounded { t_min: t_lo, t_max: t_hi });
    Ok(CompiledSmdp { model: SmdpModel::new(spec)?, states, index_of, options_at })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::options::OptionSpec;

    fn ring(n: usize) -> MdpModel {
        // action 0 moves forward, action 1 stays; reward 1 when wrapping around
        let states = (0..n)
            .map(|s| StateSpec {
                actions: vec![
                    ActionSpec::new(vec![Outcome::fixed((s + 1) % n, 1.0, if s + 1 == n { 1.0 } else { 0.0 }, 1.0)]),
                    ActionSpec::new(vec![Outcome::fixed(s, 1.0, 0.0, 1.0)]),
                ],
            })
            .collect();
        MdpModel::new(ModelSpec { r_max: 1.0, tau_min: 1.0, tau_max: 1.0, tails: None, states }).unwrap()
    }

    fn primitive(s: usize, a: usize, n: usize) -> OptionSpec {
        OptionSpec {
            label: String::new(),
            initiation: vec![s],
            termination: (0..n).map(|y| (y, 1.0)).collect(),
            policy: vec![(s, a)],
        }
    }

    #[test]
    fn primitive_options_reproduce_base() {
        let base = ring(4);
        let set = OptionSet::new((0..4).flat_map(|s| [primitive(s, 0, 4), primitive(s, 1, 4)]).collect());
        let c = compile(&base, &set).unwrap();
        assert_eq!(c.model.spec().states, base.spec().states);
        assert_eq!(c.states, vec![0, 1, 2, 3]);
    }

    #[test]
    fn two_step_option_accumulates_reward() {
        let base = ring(3);
        let mut set = OptionSet::new((0..3).flat_map(|s| [primitive(s, 0, 3), primitive(s, 1, 3)]).collect());
        // from 1: move twice, passing the wrap (reward 1), stop at 0
        set.options.push(OptionSpec {
            label: "double".into(),
            initiation: vec![1],
            termination: vec![(0, 1.0)],
            policy: vec![(1, 0), (2, 0)],
        });
        let c = compile(&base, &set).unwrap();
        let m = &c.model;
        assert_eq!(m.num_actions(1), 3);
        assert_eq!(m.tau_bar(1, 2), 2.0);
        assert_eq!(m.r_bar(1, 2), 1.0);
        assert_eq!(m.action(1, 2).outcomes[0].holding, Distribution::dirac(2.0));
        assert_eq!(m.tau_max(), 2.0);
    }

    #[test]
    fn stopping_outside_initiation_sets_is_not_admissible() {
        let base = ring(3);
        let set = OptionSet::new(vec![primitive(0, 0, 3), primitive(1, 0, 3)]);
        assert!(matches!(compile(&base, &set), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn passing_through_foreign_state_is_rejected() {
        let base = ring(3);
        let mut set = OptionSet::new(vec![primitive(0, 0, 3), primitive(1, 0, 3)]);
        // drop state 2 from the option state set but route through it
        for o in &mut set.options {
            o.termination.retain(|&(y, _)| y != 2);
        }
        set.options[1].termination = vec![(0, 1.0)];
        set.options[1].policy.push((2, 0));
        assert!(matches!(compile(&base, &set), Err(Error::LeavesOptionStates { state: 2, .. })));
    }
}
