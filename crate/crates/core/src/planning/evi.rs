use super::value_iteration::{iterate, EviSolution, OptimisticModel, MAX_SWEEPS};
use crate::error::{Error, Result};
use crate::model::SmdpModel;

/// Plausible set of SMDPs: empirical centres and confidence radii per pair,
/// together with the known clamps.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedParameterSmdp {
    pub r_hat: Vec<Vec<f64>>,
    pub tau_hat: Vec<Vec<f64>>,
    /// Sparse empirical rows; an empty row means the pair was never tried.
    pub p_hat: Vec<Vec<Vec<(usize, f64)>>>,
    pub beta_r: Vec<Vec<f64>>,
    pub beta_tau: Vec<Vec<f64>>,
    pub beta_p: Vec<Vec<f64>>,
    pub r_max: f64,
    pub tau_min: f64,
    pub tau_max: f64,
}

impl BoundedParameterSmdp {
    /// The degenerate set holding only the true means of `model`.
    pub fn point(model: &SmdpModel) -> Self {
        let n = model.num_states();
        let per_pair = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|s| (0..model.num_actions(s)).map(|a| f(s, a)).collect()).collect()
        };
        BoundedParameterSmdp {
            r_hat: per_pair(&|s, a| model.r_bar(s, a)),
            tau_hat: per_pair(&|s, a| model.tau_bar(s, a)),
            p_hat: (0..n)
                .map(|s| (0..model.num_actions(s)).map(|a| model.row(s, a).to_vec()).collect())
                .collect(),
            beta_r: per_pair(&|_, _| 0.0),
            beta_tau: per_pair(&|_, _| 0.0),
            beta_p: per_pair(&|_, _| 0.0),
            r_max: model.r_max(),
            tau_min: model.tau_min(),
            tau_max: model.tau_max(),
        }
    }

    pub fn num_states(&self) -> usize {
        self.r_hat.len()
    }

    /// r̃ = min(r̂ + β_r, R_max·τ_max).
    pub fn optimistic_reward(&self, s: usize, a: usize) -> f64 {
        (self.r_hat[s][a] + self.beta_r[s][a]).min(self.r_max * self.tau_max)
    }

    pub fn check(&self) -> Result<()> {
        for s in 0..self.num_states() {
            for a in 0..self.r_hat[s].len() {
                let radii = [self.beta_r[s][a], self.beta_tau[s][a], self.beta_p[s][a]];
                if radii.iter().any(|b| b.is_nan() || *b < 0.0) {
                    return Err(Error::Parameters(format!("negative radius at ({s}, {a})")));
                }
                let lo = self.tau_min.max(self.optimistic_reward(s, a) / self.r_max);
                if lo > self.tau_max {
                    return Err(Error::EmptyInterval { state: s, action: a });
                }
            }
        }
        Ok(())
    }

    /// Whether `model`'s means lie inside every confidence region.
    pub fn contains(&self, model: &SmdpModel) -> bool {
        (0..self.num_states()).all(|s| {
            (0..self.r_hat[s].len()).all(|a| {
                let l1: f64 = {
                    let truth = model.dense_row(s, a);
                    let mut hat = vec![0.0; truth.len()];
                    for &(j, p) in &self.p_hat[s][a] {
                        hat[j] += p;
                    }
                    truth.iter().zip(&hat).map(|(x, y)| (x - y).abs()).sum()
                };
                // an unvisited pair constrains nothing
                self.p_hat[s][a].is_empty()
                    || ((model.r_bar(s, a) - self.r_hat[s][a]).abs() <= self.beta_r[s][a]
                        && (model.tau_bar(s, a) - self.tau_hat[s][a]).abs() <= self.beta_tau[s][a]
                        && l1 <= self.beta_p[s][a])
            })
        })
    }
}

/// States ordered by decreasing value, ties by increasing index, and the
/// position of every state in that order.
pub fn value_order(u: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| u[b].total_cmp(&u[a]).then(a.cmp(&b)));
    let mut rank = vec![0; u.len()];
    for (pos, &s) in order.iter().enumerate() {
        rank[s] = pos;
    }
    (order, rank)
}

/// Maximizes pᵀu over the L1 ball of radius `beta` around `row`: put up to
/// β/2 extra mass on the best state, then take the excess away from the
/// worst states first. Returns the maximizer as a sparse row.
pub fn optimistic_transition(row: &[(usize, f64)], beta: f64, order: &[usize], rank: &[usize]) -> Vec<(usize, f64)> {
    let s_max = order[0];
    if row.is_empty() {
        return vec![(s_max, 1.0)];
    }
    let p_top_hat = row.iter().filter(|e| e.0 == s_max).map(|e| e.1).sum::<f64>();
    let top = (p_top_hat + 0.5 * beta).min(1.0);
    if top >= 1.0 {
        return vec![(s_max, 1.0)];
    }
    let mut rest: Vec<(usize, f64)> = row.iter().copied().filter(|e| e.0 != s_max && e.1 > 0.0).collect();
    rest.sort_by(|a, b| rank[b.0].cmp(&rank[a.0]));
    let mut excess = top - p_top_hat;
    for e in rest.iter_mut() {
        if excess <= 0.0 {
            break;
        }
        let take = e.1.min(excess);
        e.1 -= take;
        excess -= take;
    }
    let mut out: Vec<(usize, f64)> = rest.into_iter().filter(|e| e.1 > 0.0).collect();
    out.push((s_max, top));
    out.sort_by_key(|e| e.0);
    out
}

/// Value p̃ᵀu of [`optimistic_transition`] without materializing the row.
pub fn optimistic_value(
    row: &[(usize, f64)],
    beta: f64,
    u: &[f64],
    s_max: usize,
    rank: &[usize],
    scratch: &mut Vec<(usize, f64)>,
) -> f64 {
    if row.is_empty() {
        return u[s_max];
    }
    let p_top_hat = row.iter().filter(|e| e.0 == s_max).map(|e| e.1).sum::<f64>();
    let top = (p_top_hat + 0.5 * beta).min(1.0);
    if top >= 1.0 {
        return u[s_max];
    }
    scratch.clear();
    scratch.extend(row.iter().copied().filter(|e| e.0 != s_max && e.1 > 0.0));
    scratch.sort_by(|a, b| rank[b.0].cmp(&rank[a.0]));
    let mut excess = top - p_top_hat;
    let mut value = top * u[s_max];
    for &(j, p) in scratch.iter() {
        let take = p.min(excess.max(0.0));
        excess -= take;
        value += (p - take) * u[j];
    }
    value
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Optimistic holding time by the sign rule, clamped to
/// [max(τ_min, r̃/R_max), τ_max].
pub fn optimistic_holding(plausible: &BoundedParameterSmdp, s: usize, a: usize, r_tilde: f64, tau_param: f64, drift: f64) -> f64 {
    let lo = plausible.tau_min.max(r_tilde / plausible.r_max);
    let centre = plausible.tau_hat[s][a] - sgn(r_tilde + tau_param * drift) * plausible.beta_tau[s][a];
    centre.max(lo).min(plausible.tau_max)
}

#[derive(Debug, Clone, Default)]
pub struct EviOptions<'a> {
    pub max_sweeps: Option<u64>,
    /// Record the maximizing (r̃, τ̃, p̃) of the final sweep.
    pub with_model: bool,
    /// Starting values; zero when absent.
    pub initial_values: Option<&'a [f64]>,
}

/// Value iteration over the plausible set, jointly optimistic in rewards,
/// holding times and transitions.
pub fn extended_value_iteration(plausible: &BoundedParameterSmdp, tau_param: f64, epsilon: f64) -> Result<EviSolution> {
    extended_value_iteration_with(plausible, tau_param, epsilon, &EviOptions::default())
}

pub fn extended_value_iteration_with(
    plausible: &BoundedParameterSmdp,
    tau_param: f64,
    epsilon: f64,
    options: &EviOptions<'_>,
) -> Result<EviSolution> {
    if !(epsilon > 0.0) {
        return Err(Error::Parameters(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(tau_param > 0.0 && tau_param < plausible.tau_min) {
        return Err(Error::TauParam { tau: tau_param, tau_min: plausible.tau_min });
    }
    plausible.check()?;
    let n = plausible.num_states();
    let r_tilde: Vec<Vec<f64>> = (0..n)
        .map(|s| (0..plausible.r_hat[s].len()).map(|a| plausible.optimistic_reward(s, a)).collect())
        .collect();
    let mut scratch = Vec::new();
    let sweeps = iterate(
        n,
        epsilon,
        options.max_sweeps.unwrap_or(MAX_SWEEPS),
        options.initial_values,
        |u, next, policy| {
            let (order, rank) = value_order(u);
            let s_max = order[0];
            for s in 0..n {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for a in 0..r_tilde[s].len() {
                    let pv = optimistic_value(&plausible.p_hat[s][a], plausible.beta_p[s][a], u, s_max, &rank, &mut scratch);
                    let drift = pv - u[s];
                    let rt = r_tilde[s][a];
                    let tt = optimistic_holding(plausible, s, a, rt, tau_param, drift);
                    let v = rt / tt + (tau_param / tt) * drift;
                    if v > best {
                        best = v;
                        arg = a;
                    }
                }
                next[s] = best + u[s];
                policy[s] = arg;
            }
        },
    )?;
    let model = options.with_model.then(|| {
        let u = &sweeps.u_prev;
        let (order, rank) = value_order(u);
        let mut holding = Vec::with_capacity(n);
        let mut transition = Vec::with_capacity(n);
        for s in 0..n {
            let mut hs = Vec::new();
            let mut ps = Vec::new();
            for a in 0..r_tilde[s].len() {
                let p = optimistic_transition(&plausible.p_hat[s][a], plausible.beta_p[s][a], &order, &rank);
                let drift = p.iter().map(|&(j, w)| w * u[j]).sum::<f64>() - u[s];
                hs.push(optimistic_holding(plausible, s, a, r_tilde[s][a], tau_param, drift));
                ps.push(p);
            }
            holding.push(hs);
            transition.push(ps);
        }
        OptimisticModel { reward: r_tilde.clone(), holding, transition }
    });
    Ok(sweeps.into_solution(model))
}
