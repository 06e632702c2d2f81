use super::uniformize::UniformizedMdp;
use crate::error::{Error, Result};
use crate::model::StationaryPolicy;

/// Default cap on the number of sweeps.
pub const MAX_SWEEPS: u64 = 10_000_000;

/// Optimistic parameters chosen by extended value iteration at exit.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimisticModel {
    pub reward: Vec<Vec<f64>>,
    pub holding: Vec<Vec<f64>>,
    pub transition: Vec<Vec<Vec<(usize, f64)>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EviSolution {
    /// Final values, shifted so that the smallest entry is zero.
    pub u: Vec<f64>,
    /// Midpoint of the largest and smallest final increment.
    pub gain: f64,
    /// Greedy policy of the final sweep.
    pub policy: StationaryPolicy,
    pub optimistic_model: Option<OptimisticModel>,
    pub iterations: u64,
    /// Span of the value vector after each sweep.
    pub span_history: Vec<f64>,
    /// Largest and smallest increment of the final sweep.
    pub final_increments: (f64, f64),
}

pub(crate) struct Sweeps {
    pub u_prev: Vec<f64>,
    pub u: Vec<f64>,
    pub policy: Vec<usize>,
    pub iterations: u64,
    pub spans: Vec<f64>,
    pub incr: (f64, f64),
}

/// Runs `backup` from u₀ = 0 until the span of the increment drops below
/// `epsilon`, renormalizing after every sweep.
pub(crate) fn iterate<F>(n: usize, epsilon: f64, cap: u64, init: Option<&[f64]>, mut backup: F) -> Result<Sweeps>
where
    F: FnMut(&[f64], &mut [f64], &mut [usize]),
{
    let mut u = match init {
        Some(v) => v.to_vec(),
        None => vec![0.0; n],
    };
    let mut next = vec![0.0; n];
    let mut policy = vec![0usize; n];
    let mut spans = Vec::new();
    for it in 1..=cap {
        backup(&u, &mut next, &mut policy);
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut vmax, mut vmin) = (f64::NEG_INFINITY, f64::INFINITY);
        for s in 0..n {
            let d = next[s] - u[s];
            hi = hi.max(d);
            lo = lo.min(d);
            vmax = vmax.max(next[s]);
            vmin = vmin.min(next[s]);
        }
        spans.push(vmax - vmin);
        for x in next.iter_mut() {
            *x -= vmin;
        }
        if !(hi - lo).is_finite() {
            return Err(Error::RunAbort("value iteration produced non-finite values".into()));
        }
        if hi - lo < epsilon {
            return Ok(Sweeps { u_prev: u, u: next, policy, iterations: it, spans, incr: (hi, lo) });
        }
        std::mem::swap(&mut u, &mut next);
    }
    Err(Error::IterationCap(cap))
}

impl Sweeps {
    pub(crate) fn into_solution(self, optimistic_model: Option<OptimisticModel>) -> EviSolution {
        EviSolution {
            u: self.u,
            gain: 0.5 * (self.incr.0 + self.incr.1),
            policy: StationaryPolicy::new(self.policy),
            optimistic_model,
            iterations: self.iterations,
            span_history: self.spans,
            final_increments: self.incr,
        }
    }
}

/// Relative value iteration on the uniformized MDP with the span stopping rule.
pub fn value_iteration(mdp: &UniformizedMdp<'_>, epsilon: f64) -> Result<EviSolution> {
    value_iteration_capped(mdp, epsilon, MAX_SWEEPS)
}

pub fn value_iteration_capped(mdp: &UniformizedMdp<'_>, epsilon: f64, cap: u64) -> Result<EviSolution> {
    if !(epsilon > 0.0) {
        return Err(Error::Parameters(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = mdp.num_states();
    let sweeps = iterate(n, epsilon, cap, None, |u, next, policy| {
        for s in 0..n {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (a, row) in mdp.p_eq[s].iter().enumerate() {
                let v = mdp.r_eq[s][a] + row.iter().map(|&(j, p)| p * u[j]).sum::<f64>();
                if v > best {
                    best = v;
                    arg = a;
                }
            }
            next[s] = best;
            policy[s] = arg;
        }
    })?;
    Ok(sweeps.into_solution(None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActionSpec, ModelSpec, Outcome, SmdpModel, StateSpec};
    use crate::planning::uniformize::uniformize;

    #[test]
    fn single_state_gain() {
        let spec = ModelSpec {
            r_max: 2.0,
            tau_min: 1.0,
            tau_max: 1.0,
            tails: None,
            states: vec![StateSpec { actions: vec![ActionSpec::new(vec![Outcome::fixed(0, 1.0, 2.0, 1.0)])] }],
        };
        let m = SmdpModel::new(spec).unwrap();
        let sol = value_iteration(&uniformize(&m, 0.5).unwrap(), 1e-9).unwrap();
        assert!((sol.gain - 2.0).abs() < 1e-12);
        assert_eq!(sol.u, vec![0.0]);
    }

    #[test]
    fn rejects_bad_epsilon_and_cap() {
        let mut spec = crate::model::tests::two_state_spec();
        spec.states[1].actions[0].outcomes[0].reward = Some(crate::model::Distribution::dirac(0.5));
        let m = SmdpModel::new(spec).unwrap();
        let mdp = uniformize(&m, 0.5).unwrap();
        assert!(value_iteration(&mdp, 0.0).is_err());
        assert!(matches!(value_iteration_capped(&mdp, 1e-12, 2), Err(Error::IterationCap(2))));
    }
}
