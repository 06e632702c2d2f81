use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::{OptionSpec, OptionTables};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{MdpModel, PhaseType};

/// Residual mass below which the duration pmf stops being tabulated.
pub const PMF_TAIL: f64 = 1e-12;
const PMF_MAX_LEN: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoldingClass {
    /// The transient matrix is nilpotent: durations are bounded.
    BoundedHolding,
    /// Some state can be revisited: durations have a geometric tail.
    SubExponentialUnbounded,
}

/// An option started in a fixed state, seen as an absorbing chain.
///
/// Transient phase 0 is the start state before the first move; the other
/// phases are the states where the option may still be running. Absorbing
/// states are the states where it may stop.
#[derive(Debug, Clone)]
pub struct PhaseTypeAnalysis {
    pub start: usize,
    /// Base state of each transient phase.
    pub phase_states: Vec<usize>,
    /// Base states where the option may terminate, sorted.
    pub end_states: Vec<usize>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub spectral_radius: f64,
    pub classification: HoldingClass,
    /// P(τ = k) for k = 1, 2, ... until the residual drops below 1e-12.
    pub pmf: Vec<f64>,
    /// Mass beyond the tabulated pmf.
    pub tail_mass: f64,
    /// Probability of stopping in each end state.
    pub absorption: Vec<f64>,
    /// E[τ | end state] for each end state.
    pub expected_holding: Vec<f64>,
    /// Unconditional E[τ].
    pub mean_holding: f64,
    /// Expected reward at each transition of the chain, r̄(x, π(x), y),
    /// indexed like `q` and `r`.
    pub(crate) step_reward: DMatrix<f64>,
    pub(crate) exit_reward: DMatrix<f64>,
}

pub(crate) fn outcome_mean_reward(base: &MdpModel, s: usize, a: usize, next: usize) -> f64 {
    let act = base.action(s, a);
    let (mut w, mut r) = (0.0, 0.0);
    for o in act.outcomes.iter().filter(|o| o.next == next) {
        let mean = match (act.coupling, &o.reward) {
            (Some(c), _) => c * o.holding.mean(),
            (None, Some(d)) => d.mean(),
            (None, None) => 0.0,
        };
        w += o.prob;
        r += o.prob * mean;
    }
    if w > 0.0 {
        r / w
    } else {
        0.0
    }
}

/// Builds the absorbing chain of `option` started at `start` and derives its
/// duration law, absorption probabilities and conditional mean durations.
pub fn analyze_holding(base: &MdpModel, option: &OptionSpec, start: usize) -> Result<PhaseTypeAnalysis> {
    analyze_indexed(base, option, 0, start)
}

pub(crate) fn analyze_indexed(base: &MdpModel, option: &OptionSpec, index: usize, start: usize) -> Result<PhaseTypeAnalysis> {
    let n = base.num_states();
    if start >= n {
        return Err(Error::StateOutOfRange(start));
    }
    let tables = OptionTables::new(&super::OptionSet::new(vec![option.clone()]), n)?;
    let inner = |s: usize| -> Result<usize> {
        let a = tables.inner_action(0, s).map_err(|_| Error::UndefinedInnerPolicy { option: index, state: s })?;
        if a >= base.num_actions(s) {
            return Err(Error::ActionOutOfRange { state: s, action: a });
        }
        Ok(a)
    };

    // discover phases breadth-first
    let mut phase_states = vec![start];
    let mut phase_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut ends: BTreeMap<usize, ()> = BTreeMap::new();
    let mut edges: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut k = 0;
    while k < phase_states.len() {
        let x = phase_states[k];
        let a = inner(x)?;
        let row = base.row(x, a).to_vec();
        for &(y, p) in &row {
            if p <= 0.0 {
                continue;
            }
            let b = tables.beta(0, y);
            if b > 0.0 {
                ends.insert(y, ());
            }
            if b < 1.0 && !phase_of.contains_key(&y) {
                phase_of.insert(y, phase_states.len());
                phase_states.push(y);
            }
        }
        edges.push(row);
        k += 1;
    }
    let end_states: Vec<usize> = ends.into_keys().collect();
    let end_index: BTreeMap<usize, usize> = end_states.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    let t = phase_states.len();
    let e = end_states.len();
    let mut q = DMatrix::zeros(t, t);
    let mut r = DMatrix::zeros(t, e);
    let mut step_reward = DMatrix::zeros(t, t);
    let mut exit_reward = DMatrix::zeros(t, e);
    for (i, row) in edges.iter().enumerate() {
        let x = phase_states[i];
        let a = inner(x)?;
        for &(y, p) in row {
            let b = tables.beta(0, y);
            let rew = outcome_mean_reward(base, x, a, y);
            if b < 1.0 {
                let j = phase_of[&y];
                q[(i, j)] += p * (1.0 - b);
                step_reward[(i, j)] = rew;
            }
            if b > 0.0 {
                let j = end_index[&y];
                r[(i, j)] += p * b;
                exit_reward[(i, j)] = rew;
            }
        }
    }

    let radius = linalg::spectral_radius(&q);
    let exits_reachable = {
        // every phase must reach some exit along positive entries
        let mut can = vec![false; t];
        for i in 0..t {
            can[i] = (0..e).any(|j| r[(i, j)] > 0.0);
        }
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..t {
                if !can[i] && (0..t).any(|j| q[(i, j)] > 0.0 && can[j]) {
                    can[i] = true;
                    changed = true;
                }
            }
        }
        can.iter().all(|c| *c)
    };
    if !exits_reachable || radius >= 1.0 - 1e-12 {
        return Err(Error::NonTerminating { option: index, radius: if exits_reachable { radius } else { 1.0 } });
    }

    let a = DMatrix::identity(t, t) - &q;
    let lu = a.clone().lu();
    let fundamental = lu.try_inverse().ok_or(Error::NonTerminating { option: index, radius })?;
    // absorption: e_0ᵀ (I − Q)⁻¹ R
    let absorb_all = &fundamental * &r;
    let absorption: Vec<f64> = (0..e).map(|j| absorb_all[(0, j)]).collect();
    // E[τ 1{end}] = e_0ᵀ (I − Q)⁻² R
    let timed = &fundamental * &absorb_all;
    let expected_holding: Vec<f64> = (0..e).map(|j| timed[(0, j)] / absorption[j]).collect();
    let mean_holding = fundamental.row(0).sum();

    let rows: Vec<Vec<f64>> = (0..t).map(|i| (0..t).map(|j| q[(i, j)]).collect()).collect();
    let classification = if linalg::is_acyclic(&rows) {
        HoldingClass::BoundedHolding
    } else {
        HoldingClass::SubExponentialUnbounded
    };

    // unconditional pmf e_0ᵀ Q^{k−1} R 1
    let exit_total = DVector::from_fn(t, |i, _| r.row(i).sum());
    let survive = &fundamental * &exit_total;
    let mut row = DVector::zeros(t);
    row[0] = 1.0;
    let mut pmf = Vec::new();
    let mut tail_mass = 1.0;
    while tail_mass >= PMF_TAIL && pmf.len() < PMF_MAX_LEN {
        pmf.push(row.dot(&exit_total));
        row = q.tr_mul(&row);
        tail_mass = row.dot(&survive).max(0.0);
    }

    Ok(PhaseTypeAnalysis {
        start,
        phase_states,
        end_states,
        q,
        r,
        spectral_radius: radius,
        classification,
        pmf,
        tail_mass,
        absorption,
        expected_holding,
        mean_holding,
        step_reward,
        exit_reward,
    })
}

impl PhaseTypeAnalysis {
    fn law(&self, end: usize, step: &DMatrix<f64>, exit: &DMatrix<f64>) -> PhaseType {
        let t = self.q.nrows();
        PhaseType {
            start: 0,
            transient: (0..t).map(|i| (0..t).map(|j| self.q[(i, j)]).collect()).collect(),
            exit: (0..t).map(|i| self.r[(i, end)]).collect(),
            step_value: (0..t).map(|i| (0..t).map(|j| step[(i, j)]).collect()).collect(),
            exit_value: (0..t).map(|i| exit[(i, end)]).collect(),
        }
    }

    /// Duration law conditioned on stopping in `end_states[end]`.
    pub fn holding_law(&self, end: usize) -> PhaseType {
        let t = self.q.nrows();
        let ones = DMatrix::from_element(t, t, 1.0);
        let ones_exit = DMatrix::from_element(t, self.r.ncols(), 1.0);
        self.law(end, &ones, &ones_exit)
    }

    /// Cumulative reward law conditioned on stopping in `end_states[end]`.
    pub fn reward_law(&self, end: usize) -> PhaseType {
        self.law(end, &self.step_reward, &self.exit_reward)
    }

    /// E[τ] from the tabulated pmf.
    pub fn pmf_mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| (k + 1) as f64 * p).sum()
    }
}
