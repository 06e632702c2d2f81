use crate::error::{Error, Result};
use crate::model::SmdpModel;

/// Gain-equivalent MDP obtained from an SMDP by the data transformation
/// r_eq = r̄/τ̄, p_eq = (τ/τ̄)(p − I) + I.
#[derive(Debug, Clone)]
pub struct UniformizedMdp<'a> {
    pub base: &'a SmdpModel,
    pub tau_param: f64,
    pub r_eq: Vec<Vec<f64>>,
    /// Sparse rows sorted by successor; the diagonal is always present.
    pub p_eq: Vec<Vec<Vec<(usize, f64)>>>,
}

/// The default transformation parameter, 0.9·τ_min.
pub fn default_tau(model: &SmdpModel) -> f64 {
    0.9 * model.tau_min()
}

pub fn uniformize(model: &SmdpModel, tau_param: f64) -> Result<UniformizedMdp<'_>> {
    if !(tau_param > 0.0 && tau_param < model.tau_min()) {
        return Err(Error::TauParam { tau: tau_param, tau_min: model.tau_min() });
    }
    let n = model.num_states();
    let mut r_eq = Vec::with_capacity(n);
    let mut p_eq = Vec::with_capacity(n);
    for s in 0..n {
        let mut rs = Vec::with_capacity(model.num_actions(s));
        let mut ps = Vec::with_capacity(model.num_actions(s));
        for a in 0..model.num_actions(s) {
            let t = model.tau_bar(s, a);
            rs.push(model.r_bar(s, a) / t);
            ps.push(transform_row(model.row(s, a), s, tau_param / t));
        }
        r_eq.push(rs);
        p_eq.push(ps);
    }
    Ok(UniformizedMdp { base: model, tau_param, r_eq, p_eq })
}

fn transform_row(row: &[(usize, f64)], s: usize, ratio: f64) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len() + 1);
    let mut diag_seen = false;
    for &(j, p) in row {
        if j == s {
            out.push((j, ratio * (p - 1.0) + 1.0));
            diag_seen = true;
        } else {
            out.push((j, ratio * p));
        }
    }
    if !diag_seen {
        out.push((s, 1.0 - ratio));
        out.sort_by_key(|e| e.0);
    }
    out
}

impl UniformizedMdp<'_> {
    pub fn num_states(&self) -> usize {
        self.r_eq.len()
    }

    pub fn dense_row(&self, s: usize, a: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.num_states()];
        for &(j, w) in &self.p_eq[s][a] {
            p[j] += w;
        }
        p
    }
}
