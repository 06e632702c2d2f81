//! Reward and holding-time distributions attached to each transition.
//!
//! Distributions are explicit tagged unions so that the learner and the
//! planners can query means and support bounds, not only draw samples.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg;

/// Tolerance used when checking that masses sum to one.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Distribution {
    /// Point mass.
    Dirac { value: f64 },
    /// `high` with probability `p_high`, `low` otherwise.
    TwoPoint { low: f64, high: f64, p_high: f64 },
    /// Finite table of support points and masses.
    Table { support: Vec<f64>, masses: Vec<f64> },
    /// Value accumulated along the path of an absorbing chain, conditioned on
    /// absorption through the designated exit.
    PhaseType(PhaseType),
}

impl Distribution {
    pub fn dirac(value: f64) -> Self {
        Distribution::Dirac { value }
    }

    pub fn two_point(low: f64, high: f64, p_high: f64) -> Self {
        Distribution::TwoPoint { low, high, p_high }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Dirac { value } => *value,
            Distribution::TwoPoint { low, high, p_high } => low + p_high * (high - low),
            Distribution::Table { support, masses } => {
                support.iter().zip(masses).map(|(x, w)| x * w).sum()
            }
            Distribution::PhaseType(ph) => ph.mean(),
        }
    }

    /// Smallest and largest value in the support, when bounded.
    pub fn support_bounds(&self) -> Option<(f64, f64)> {
        match self {
            Distribution::Dirac { value } => Some((*value, *value)),
            Distribution::TwoPoint { low, high, p_high } => {
                if *p_high <= 0.0 {
                    Some((*low, *low))
                } else if *p_high >= 1.0 {
                    Some((*high, *high))
                } else {
                    Some((low.min(*high), low.max(*high)))
                }
            }
            Distribution::Table { support, masses } => {
                let mut it = support
                    .iter()
                    .zip(masses)
                    .filter(|(_, w)| **w > 0.0)
                    .map(|(x, _)| *x);
                let first = it.next()?;
                Some(it.fold((first, first), |(lo, hi), x| (lo.min(x), hi.max(x))))
            }
            Distribution::PhaseType(ph) => ph.support_bounds(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Distribution::Dirac { value } => *value,
            Distribution::TwoPoint { low, high, p_high } => {
                if rng.random::<f64>() < *p_high {
                    *high
                } else {
                    *low
                }
            }
            Distribution::Table { support, masses } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (x, w) in support.iter().zip(masses) {
                    acc += w;
                    if u < acc {
                        return *x;
                    }
                }
                // rounding left a sliver of mass above the last cumulative sum
                support
                    .iter()
                    .zip(masses)
                    .rev()
                    .find(|(_, w)| **w > 0.0)
                    .map(|(x, _)| *x)
                    .unwrap_or(0.0)
            }
            Distribution::PhaseType(ph) => ph.sample(rng),
        }
    }

    pub fn is_degenerate_at(&self, x: f64) -> bool {
        matches!(self.support_bounds(), Some((lo, hi)) if lo == x && hi == x)
    }

    /// Reports the first structural problem found, if any.
    pub fn check(&self) -> Result<(), String> {
        match self {
            Distribution::Dirac { value } => finite("value", *value),
            Distribution::TwoPoint { low, high, p_high } => {
                finite("low", *low)?;
                finite("high", *high)?;
                if !(0.0..=1.0).contains(p_high) {
                    return Err(format!("p_high = {p_high} outside [0, 1]"));
                }
                Ok(())
            }
            Distribution::Table { support, masses } => {
                if support.is_empty() || support.len() != masses.len() {
                    return Err(format!(
                        "support has {} points but {} masses",
                        support.len(),
                        masses.len()
                    ));
                }
                for x in support {
                    finite("support value", *x)?;
                }
                if masses.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err("negative or non-finite mass".into());
                }
                let total: f64 = masses.iter().sum();
                if (total - 1.0).abs() > MASS_TOLERANCE {
                    return Err(format!("masses sum to {total}"));
                }
                Ok(())
            }
            Distribution::PhaseType(ph) => ph.check(),
        }
    }
}

fn finite(name: &str, x: f64) -> Result<(), String> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} is not finite"))
    }
}

/// Discrete phase-type law with path-dependent values.
///
/// The chain starts in transient phase `start`. From phase `i` it moves to
/// phase `j` with probability `transient[i][j]`, accruing `step_value[i][j]`,
/// or leaves through the designated exit with probability `exit[i]`, accruing
/// `exit_value[i]`. Any remaining mass leaves through other exits. The law
/// described is that of the total accrued value conditioned on leaving
/// through the designated exit. Holding times use unit values everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseType {
    pub start: usize,
    pub transient: Vec<Vec<f64>>,
    pub exit: Vec<f64>,
    pub step_value: Vec<Vec<f64>>,
    pub exit_value: Vec<f64>,
}

impl PhaseType {
    /// A phase-type holding time: every move counts one step.
    pub fn holding(start: usize, transient: Vec<Vec<f64>>, exit: Vec<f64>) -> Self {
        let n = exit.len();
        PhaseType {
            start,
            transient,
            exit,
            step_value: vec![vec![1.0; n]; n],
            exit_value: vec![1.0; n],
        }
    }

    pub fn phases(&self) -> usize {
        self.exit.len()
    }

    fn q_matrix(&self) -> DMatrix<f64> {
        let n = self.phases();
        DMatrix::from_fn(n, n, |i, j| self.transient[i][j])
    }

    /// Probability of leaving through the designated exit from each phase.
    pub fn exit_probabilities(&self) -> Option<DVector<f64>> {
        let n = self.phases();
        let a = DMatrix::identity(n, n) - self.q_matrix();
        linalg::solve(a, DVector::from_column_slice(&self.exit))
    }

    pub fn mean(&self) -> f64 {
        let n = self.phases();
        let Some(h) = self.exit_probabilities() else {
            return f64::NAN;
        };
        let rhs = DVector::from_fn(n, |i, _| {
            let moves: f64 = (0..n)
                .map(|j| self.transient[i][j] * self.step_value[i][j] * h[j])
                .sum();
            moves + self.exit[i] * self.exit_value[i]
        });
        let a = DMatrix::identity(n, n) - self.q_matrix();
        match linalg::solve(a, rhs) {
            Some(g) => g[self.start] / h[self.start],
            None => f64::NAN,
        }
    }

    /// Whether no phase can be revisited, i.e. the transient matrix is nilpotent.
    pub fn is_acyclic(&self) -> bool {
        linalg::is_acyclic(&self.transient)
    }

    fn support_bounds(&self) -> Option<(f64, f64)> {
        if !self.is_acyclic() {
            // unbounded unless every value is zero
            let all_zero = self.step_value.iter().flatten().all(|v| *v == 0.0)
                && self.exit_value.iter().all(|v| *v == 0.0);
            return all_zero.then_some((0.0, 0.0));
        }
        let h = self.exit_probabilities()?;
        // longest / shortest accrued value over paths that reach the exit
        let n = self.phases();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        let order = linalg::reverse_topological_order(&self.transient);
        for &i in &order {
            if self.exit[i] > 0.0 {
                lo[i] = lo[i].min(self.exit_value[i]);
                hi[i] = hi[i].max(self.exit_value[i]);
            }
            for j in 0..n {
                if self.transient[i][j] > 0.0 && h[j] > 0.0 {
                    lo[i] = lo[i].min(self.step_value[i][j] + lo[j]);
                    hi[i] = hi[i].max(self.step_value[i][j] + hi[j]);
                }
            }
        }
        let (l, u) = (lo[self.start], hi[self.start]);
        (l.is_finite() && u.is_finite()).then_some((l, u))
    }

    /// Probability mass function of the number of moves, conditioned on the
    /// designated exit, tabulated until the untabulated mass drops below `tail`.
    /// Returns the table (index 0 is one move) and the residual mass.
    pub fn step_count_pmf(&self, tail: f64, max_len: usize) -> (Vec<f64>, f64) {
        let n = self.phases();
        let Some(h) = self.exit_probabilities() else {
            return (Vec::new(), 1.0);
        };
        let norm = h[self.start];
        let mut row = vec![0.0; n];
        row[self.start] = 1.0;
        let mut pmf = Vec::new();
        let mut remaining = 1.0;
        while remaining >= tail && pmf.len() < max_len {
            let p: f64 = row.iter().zip(&self.exit).map(|(x, e)| x * e).sum::<f64>() / norm;
            pmf.push(p);
            let mut next = vec![0.0; n];
            for i in 0..n {
                if row[i] != 0.0 {
                    for j in 0..n {
                        next[j] += row[i] * self.transient[i][j];
                    }
                }
            }
            row = next;
            // mass still in flight that will eventually use the designated exit
            remaining = row.iter().zip(h.iter()).map(|(x, hj)| x * hj).sum::<f64>() / norm;
        }
        (pmf, remaining.max(0.0))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let n = self.phases();
        let Some(h) = self.exit_probabilities() else {
            return f64::NAN;
        };
        let mut phase = self.start;
        let mut total = 0.0;
        loop {
            // Doob transform: condition every move on eventually using the exit
            let u: f64 = rng.random::<f64>() * h[phase];
            let mut acc = self.exit[phase];
            if u < acc {
                return total + self.exit_value[phase];
            }
            let mut moved = None;
            for j in 0..n {
                let w = self.transient[phase][j] * h[j];
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                moved = Some(j);
                if u < acc {
                    break;
                }
            }
            match moved {
                Some(j) => {
                    total += self.step_value[phase][j];
                    phase = j;
                }
                None => return total + self.exit_value[phase],
            }
        }
    }

    fn check(&self) -> Result<(), String> {
        let n = self.phases();
        if n == 0 || self.start >= n {
            return Err("phase-type start phase out of range".into());
        }
        let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !square(&self.transient) || !square(&self.step_value) || self.exit_value.len() != n {
            return Err("phase-type matrices have inconsistent shapes".into());
        }
        for i in 0..n {
            let row: f64 = self.transient[i].iter().sum::<f64>() + self.exit[i];
            if self.transient[i].iter().chain(std::iter::once(&self.exit[i])).any(|p| !p.is_finite() || *p < 0.0)
                || row > 1.0 + MASS_TOLERANCE
            {
                return Err(format!("phase {i} is not sub-stochastic"));
            }
        }
        if self.step_value.iter().flatten().chain(&self.exit_value).any(|v| !v.is_finite()) {
            return Err("phase-type values must be finite".into());
        }
        match self.exit_probabilities() {
            Some(h) if h[self.start] > 0.0 => Ok(()),
            _ => Err("designated exit unreachable or chain does not terminate".into()),
        }
    }
}
