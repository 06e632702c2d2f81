//! Brute-force gains: stationary distributions of every recurrent class,
//! absorption probabilities into the classes, and enumeration of all
//! stationary deterministic policies.

use nalgebra::{DMatrix, DVector};

use super::uniformize::UniformizedMdp;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{SmdpModel, StationaryPolicy};

fn policy_matrix(model: &SmdpModel, policy: &StationaryPolicy) -> DMatrix<f64> {
    let n = model.num_states();
    let mut p = DMatrix::zeros(n, n);
    for s in 0..n {
        for &(j, w) in model.row(s, policy.choice[s]) {
            p[(s, j)] += w;
        }
    }
    p
}

/// Recurrent classes of a stochastic matrix: its closed strongly connected
/// components.
pub fn recurrent_classes(p: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = p.nrows();
    let adjacency: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| p[(i, j)] > 0.0).collect()).collect();
    let comps = linalg::strongly_connected_components(&adjacency);
    let mut owner = vec![usize::MAX; n];
    for (c, comp) in comps.iter().enumerate() {
        for &s in comp {
            owner[s] = c;
        }
    }
    let mut classes: Vec<Vec<usize>> = comps
        .iter()
        .enumerate()
        .filter(|(c, comp)| comp.iter().all(|&s| adjacency[s].iter().all(|&j| owner[j] == *c)))
        .map(|(_, comp)| comp.clone())
        .collect();
    classes.sort();
    classes
}

fn stationary_distribution(p: &DMatrix<f64>, class: &[usize]) -> Option<DVector<f64>> {
    let k = class.len();
    // μ(I − P_C) = 0 with Σμ = 1: replace the last equation by normalization
    let mut a = DMatrix::zeros(k, k);
    for (r, &i) in class.iter().enumerate() {
        for (c, &j) in class.iter().enumerate() {
            a[(c, r)] = if i == j { 1.0 } else { 0.0 } - p[(i, j)];
        }
    }
    let mut b = DVector::zeros(k);
    for c in 0..k {
        a[(k - 1, c)] = 1.0;
    }
    b[k - 1] = 1.0;
    linalg::solve(a, b)
}

/// Gain of a stationary policy from every starting state, computed as the
/// absorption-weighted ratio of stationary expected reward to stationary
/// expected holding time over the recurrent classes.
pub fn policy_gain(model: &SmdpModel, policy: &StationaryPolicy) -> Result<Vec<f64>> {
    policy.check(model)?;
    let n = model.num_states();
    let p = policy_matrix(model, policy);
    let classes = recurrent_classes(&p);
    let mut class_of = vec![None; n];
    let mut class_gain = Vec::with_capacity(classes.len());
    for (c, class) in classes.iter().enumerate() {
        let mu = stationary_distribution(&p, class)
            .ok_or_else(|| Error::RunAbort("singular stationary system".into()))?;
        let (mut rew, mut hold) = (0.0, 0.0);
        for (k, &s) in class.iter().enumerate() {
            let a = policy.choice[s];
            rew += mu[k] * model.r_bar(s, a);
            hold += mu[k] * model.tau_bar(s, a);
            class_of[s] = Some(c);
        }
        class_gain.push(rew / hold);
    }
    let transient: Vec<usize> = (0..n).filter(|&s| class_of[s].is_none()).collect();
    let mut gain = vec![0.0; n];
    for s in 0..n {
        if let Some(c) = class_of[s] {
            gain[s] = class_gain[c];
        }
    }
    if transient.is_empty() {
        return Ok(gain);
    }
    // absorption probabilities: (I − P_TT) X = P_TC
    let t = transient.len();
    let mut a = DMatrix::identity(t, t);
    for (r, &i) in transient.iter().enumerate() {
        for (c, &j) in transient.iter().enumerate() {
            a[(r, c)] -= p[(i, j)];
        }
    }
    let b = DVector::from_fn(t, |r, _| {
        let i = transient[r];
        (0..n)
            .filter_map(|j| class_of[j].map(|c| p[(i, j)] * class_gain[c]))
            .sum::<f64>()
    });
    let x = linalg::solve(a, b).ok_or_else(|| Error::RunAbort("singular absorption system".into()))?;
    for (r, &i) in transient.iter().enumerate() {
        gain[i] = x[r];
    }
    Ok(gain)
}

/// Optimal gain by enumerating every stationary deterministic policy; the
/// returned policy maximizes the worst-state gain, lowest index on ties.
pub fn gain_oracle(model: &SmdpModel) -> Result<(f64, StationaryPolicy)> {
    let mut best: Option<(f64, StationaryPolicy)> = None;
    for policy in StationaryPolicy::enumerate(model) {
        let g = policy_gain(model, &policy)?;
        let worst = g.iter().copied().fold(f64::INFINITY, f64::min);
        if best.as_ref().is_none_or(|(b, _)| worst > *b) {
            best = Some((worst, policy));
        }
    }
    best.ok_or_else(|| Error::Validation("model has no policies".into()))
}

/// Gain of a stationary policy on the uniformized MDP, `P* r_eq`, with the
/// limiting matrix obtained by repeated squaring of the aperiodic chain.
pub fn policy_gain_uniformized(mdp: &UniformizedMdp<'_>, policy: &StationaryPolicy) -> Result<Vec<f64>> {
    policy.check(mdp.base)?;
    let n = mdp.num_states();
    let mut p = DMatrix::<f64>::zeros(n, n);
    for s in 0..n {
        for &(j, w) in &mdp.p_eq[s][policy.choice[s]] {
            p[(s, j)] += w;
        }
    }
    // 2^64 steps is far past mixing; rows are renormalized because rounding
    // above 1 would otherwise compound with every squaring
    for _ in 0..64 {
        let mut next = &p * &p;
        for mut row in next.row_iter_mut() {
            let total = row.sum();
            row /= total;
        }
        let change = (&next - &p).abs().max();
        p = next;
        if change < 1e-15 {
            break;
        }
    }
    let r = DVector::from_fn(n, |s, _| mdp.r_eq[s][policy.choice[s]]);
    let g: DVector<f64> = p * r;
    Ok(g.iter().copied().collect())
}
