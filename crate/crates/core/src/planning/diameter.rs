use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::uniformize::UniformizedMdp;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::SmdpModel;

const TOLERANCE: f64 = 1e-9;
const MAX_SWEEPS: usize = 10_000_000;
/// Largest state count for which hitting times are refined by exact
/// policy evaluation.
const POLISH_LIMIT: usize = 256;

/// Expected-time-to-reach problem: sparse rows and a per-pair cost.
struct Reachability<'a> {
    rows: Vec<&'a [Vec<(usize, f64)>]>,
    cost: Vec<Vec<f64>>,
}

impl Reachability<'_> {
    fn n(&self) -> usize {
        self.rows.len()
    }

    /// Minimal expected cost to reach `target` from every state.
    fn hitting_times(&self, target: usize) -> Result<Vec<f64>> {
        let n = self.n();
        self.check_reachable(target)?;
        let mut h = vec![0.0; n];
        let mut policy = vec![0usize; n];
        let mut sweeps = 0usize;
        loop {
            let mut change: f64 = 0.0;
            for s in 0..n {
                if s == target {
                    continue;
                }
                let (v, a) = self.best(s, target, &h);
                change = change.max((v - h[s]).abs() / v.max(1.0));
                h[s] = v;
                policy[s] = a;
            }
            sweeps += 1;
            if change < TOLERANCE {
                break;
            }
            if sweeps > MAX_SWEEPS || !change.is_finite() {
                return Err(Error::NotCommunicating(format!("hitting times to state {target} diverge")));
            }
        }
        if n <= POLISH_LIMIT {
            self.polish(target, &mut h, &mut policy)?;
        }
        Ok(h)
    }

    /// Every state must reach `target` along positive-probability edges.
    fn check_reachable(&self, target: usize) -> Result<()> {
        let n = self.n();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for s in 0..n {
            for row in self.rows[s] {
                for &(j, p) in row {
                    if p > 0.0 {
                        preds[j].push(s);
                    }
                }
            }
        }
        let mut seen = vec![false; n];
        seen[target] = true;
        let mut stack = vec![target];
        while let Some(j) = stack.pop() {
            for &s in &preds[j] {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        match seen.iter().position(|x| !x) {
            Some(s) => Err(Error::NotCommunicating(format!("state {target} is unreachable from state {s}"))),
            None => Ok(()),
        }
    }

    fn best(&self, s: usize, target: usize, h: &[f64]) -> (f64, usize) {
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for (a, row) in self.rows[s].iter().enumerate() {
            let v = self.cost[s][a] + row.iter().filter(|e| e.0 != target).map(|&(j, p)| p * h[j]).sum::<f64>();
            if v < best {
                best = v;
                arg = a;
            }
        }
        (best, arg)
    }

    /// Policy iteration started from the value-iteration policy; exact up to
    /// the LU solve.
    fn polish(&self, target: usize, h: &mut [f64], policy: &mut [usize]) -> Result<()> {
        let n = self.n();
        for _ in 0..100 {
            let mut a = DMatrix::identity(n, n);
            let mut b = DVector::zeros(n);
            for s in 0..n {
                if s == target {
                    continue;
                }
                b[s] = self.cost[s][policy[s]];
                for &(j, p) in &self.rows[s][policy[s]] {
                    if j != target {
                        a[(s, j)] -= p;
                    }
                }
            }
            let Some(x) = linalg::solve(a, b) else {
                return Ok(());
            };
            if x.iter().any(|v| *v < 0.0) {
                return Ok(());
            }
            h.copy_from_slice(x.as_slice());
            let mut stable = true;
            for s in 0..n {
                if s == target {
                    continue;
                }
                let (v, arg) = self.best(s, target, h);
                if v < h[s] * (1.0 - 1e-13) && arg != policy[s] {
                    policy[s] = arg;
                    stable = false;
                }
            }
            if stable {
                break;
            }
        }
        Ok(())
    }

    fn diameter(&self) -> Result<f64> {
        let per_target: Result<Vec<f64>> = (0..self.n())
            .into_par_iter()
            .map(|t| Ok(self.hitting_times(t)?.into_iter().fold(0.0, f64::max)))
            .collect();
        Ok(per_target?.into_iter().fold(0.0, f64::max))
    }
}

/// Largest, over ordered state pairs, of the smallest expected time needed to
/// travel between them, with time measured by expected holding times.
pub fn diameter(model: &SmdpModel) -> Result<f64> {
    let n = model.num_states();
    let rows: Vec<Vec<Vec<(usize, f64)>>> =
        (0..n).map(|s| (0..model.num_actions(s)).map(|a| model.row(s, a).to_vec()).collect()).collect();
    let problem = Reachability {
        rows: rows.iter().map(|r| r.as_slice()).collect(),
        cost: (0..n).map(|s| (0..model.num_actions(s)).map(|a| model.tau_bar(s, a)).collect()).collect(),
    };
    problem.diameter()
}

/// Diameter of the uniformized MDP, counting one unit per transition.
pub fn diameter_uniformized(mdp: &UniformizedMdp<'_>) -> Result<f64> {
    let problem = Reachability {
        rows: mdp.p_eq.iter().map(|r| r.as_slice()).collect(),
        cost: mdp.p_eq.iter().map(|r| vec![1.0; r.len()]).collect(),
    };
    problem.diameter()
}

/// Both diameters, D(M) and D(M_eq); they satisfy D(M) = τ·D(M_eq).
pub fn equivalent_diameter_check(model: &SmdpModel, tau_param: f64) -> Result<(f64, f64)> {
    let mdp = super::uniformize(model, tau_param)?;
    Ok((diameter(model)?, diameter_uniformized(&mdp)?))
}

/// Expected hitting times of `target` from every state under the best
/// stationary policy.
pub fn hitting_times(model: &SmdpModel, target: usize) -> Result<Vec<f64>> {
    let n = model.num_states();
    if target >= n {
        return Err(Error::StateOutOfRange(target));
    }
    let rows: Vec<Vec<Vec<(usize, f64)>>> =
        (0..n).map(|s| (0..model.num_actions(s)).map(|a| model.row(s, a).to_vec()).collect()).collect();
    let problem = Reachability {
        rows: rows.iter().map(|r| r.as_slice()).collect(),
        cost: (0..n).map(|s| (0..model.num_actions(s)).map(|a| model.tau_bar(s, a)).collect()).collect(),
    };
    problem.hitting_times(target)
}
