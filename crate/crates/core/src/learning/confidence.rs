//! Confidence radii around the empirical SMDP parameters.

use serde::{Deserialize, Serialize};

use super::Counters;
use crate::error::{Error, Result};
use crate::model::{SmdpModel, TailParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadiusMode {
    SubExponential { sigma_r: f64, b_r: f64, sigma_tau: f64, b_tau: f64 },
    /// Rewards in [0, r_max·t_max] and holding times in [t_min, t_max].
    Bounded { t_min: f64, t_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidencePolicy {
    pub mode: RadiusMode,
    pub delta: f64,
    pub r_max: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    /// Multiplier applied to all three radii; 1 gives the theoretical sets.
    #[serde(default = "unit")]
    pub scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl ConfidencePolicy {
    /// Policy using the model's declared bounds and tail parameters. Models
    /// without tail metadata are treated as bounded by their extreme
    /// supports.
    pub fn for_model(model: &SmdpModel, delta: f64) -> Self {
        let mode = match model.tails() {
            Some(TailParams::Bounded { t_min, t_max }) => RadiusMode::Bounded { t_min, t_max },
            Some(TailParams::SubExponential { sigma_r, b_r, sigma_tau, b_tau }) => {
                RadiusMode::SubExponential { sigma_r, b_r, sigma_tau, b_tau }
            }
            None => {
                let (t_min, t_max) = holding_support(model);
                RadiusMode::Bounded { t_min, t_max }
            }
        };
        ConfidencePolicy { mode, delta, r_max: model.r_max(), tau_min: model.tau_min(), tau_max: model.tau_max(), scale: 1.0 }
    }

    /// Policy with range-based radii built from the extreme holding-time
    /// supports of `model`, whatever its tail metadata says.
    pub fn bounded_for_model(model: &SmdpModel, delta: f64) -> Self {
        let (t_min, t_max) = match model.tails() {
            Some(TailParams::Bounded { t_min, t_max }) => (t_min, t_max),
            _ => holding_support(model),
        };
        Self::for_model(model, delta).with_mode(RadiusMode::Bounded { t_min, t_max })
    }

    pub fn with_mode(mut self, mode: RadiusMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn check(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Parameters(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.r_max > 0.0 && self.tau_min > 0.0 && self.tau_min <= self.tau_max) {
            return Err(Error::Parameters("need r_max > 0 and 0 < tau_min <= tau_max".into()));
        }
        if !(self.scale >= 0.0) {
            return Err(Error::Parameters(format!("radius scale must be non-negative, got {}", self.scale)));
        }
        let ok = match self.mode {
            RadiusMode::SubExponential { sigma_r, b_r, sigma_tau, b_tau } => {
                sigma_r > 0.0 && b_r > 0.0 && sigma_tau > 0.0 && b_tau > 0.0
            }
            RadiusMode::Bounded { t_min, t_max } => t_min > 0.0 && t_min <= t_max,
        };
        if !ok {
            return Err(Error::Parameters(format!("invalid radius mode {:?}", self.mode)));
        }
        Ok(())
    }

    /// Radii (β_r, β_τ, β_p) for a pair with `n` prior visits, in a model
    /// with `s` states and at most `a` actions per state, at episode start
    /// `i_k`.
    pub fn radii(&self, s: usize, a: usize, i_k: u64, n: u64) -> (f64, f64, f64) {
        let (sf, af, i) = (s as f64, a as f64, i_k as f64);
        let nn = n.max(1) as f64;
        let log_sa = (2.0 * sf * af * i / self.delta).ln();
        let beta_p = (14.0 * sf * (2.0 * af * i / self.delta).ln() / nn).sqrt();
        let (beta_r, beta_tau) = match self.mode {
            RadiusMode::SubExponential { sigma_r, b_r, sigma_tau, b_tau } => {
                // ln(240 S A i⁷ / δ) without forming i⁷
                let log_threshold = (240.0 * sf * af / self.delta).ln() + 7.0 * i.ln();
                let radius = |sigma: f64, b: f64| {
                    if n as f64 >= 2.0 * b * b / (sigma * sigma) * log_threshold {
                        sigma * (14.0 * log_sa / nn).sqrt()
                    } else {
                        14.0 * b * log_sa / nn
                    }
                };
                (radius(sigma_r, b_r), radius(sigma_tau, b_tau))
            }
            RadiusMode::Bounded { t_min, t_max } => {
                let root = (14.0 * log_sa / nn).sqrt();
                (self.r_max * t_max * root, (t_max - t_min) * root)
            }
        };
        (self.scale * beta_r, self.scale * beta_tau, self.scale * beta_p)
    }
}

/// Radii of pair `(s, a)` given the learner's counters, evaluated at the
/// start of the current episode `i_k`.
pub fn confidence_radii(counters: &Counters, policy: &ConfidencePolicy, i_k: u64, s: usize, a: usize) -> (f64, f64, f64) {
    let n = counters.n[counters.pair(s, a)];
    policy.radii(counters.num_states(), counters.max_actions(), i_k, n)
}

/// Smallest and largest holding time any outcome can produce; unbounded
/// laws give an infinite upper end.
fn holding_support(model: &SmdpModel) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for s in 0..model.num_states() {
        for a in 0..model.num_actions(s) {
            for o in &model.action(s, a).outcomes {
                match o.holding.support_bounds() {
                    Some((l, h)) => {
                        lo = lo.min(l);
                        hi = hi.max(h);
                    }
                    None => hi = f64::INFINITY,
                }
            }
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub_exp(delta: f64) -> ConfidencePolicy {
        ConfidencePolicy {
            mode: RadiusMode::SubExponential { sigma_r: 1.0, b_r: 1.0, sigma_tau: 1.0, b_tau: 1.0 },
            delta,
            r_max: 1.0,
            tau_min: 1.0,
            tau_max: 2.0,
            scale: 1.0,
        }
    }

    #[test]
    fn worked_example_below_threshold() {
        let (br, bt, bp) = sub_exp(0.1).radii(2, 2, 100, 50);
        // threshold 2 ln(240·4·100⁷/0.1) ≈ 83 > 50, so the linear branch applies
        let expected = 14.0 * (2.0f64 * 2.0 * 2.0 * 100.0 / 0.1).ln() / 50.0;
        assert!((br - expected).abs() < 1e-12);
        assert!((br - 14.0 * 8000f64.ln() / 50.0).abs() < 1e-12);
        assert_eq!(br, bt);
        let p = (14.0 * 2.0 * (2.0f64 * 2.0 * 100.0 / 0.1).ln() / 50.0).sqrt();
        assert!((bp - p).abs() < 1e-12);
    }

    #[test]
    fn above_threshold_uses_square_root() {
        let n = 1000;
        let (br, _, _) = sub_exp(0.1).radii(2, 2, 100, n);
        let want = (14.0 * 8000f64.ln() / n as f64).sqrt();
        assert!((br - want).abs() < 1e-12);
    }

    #[test]
    fn unvisited_uses_one_and_doubling_scales() {
        let pol = sub_exp(0.05);
        assert_eq!(pol.radii(3, 2, 10, 0), pol.radii(3, 2, 10, 1));
        let (_, _, p1) = pol.radii(3, 2, 10, 40);
        let (_, _, p2) = pol.radii(3, 2, 10, 80);
        assert!((p1 / p2 - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bounded_ranges() {
        let pol = ConfidencePolicy { mode: RadiusMode::Bounded { t_min: 1.0, t_max: 3.0 }, ..sub_exp(0.1) };
        let (br, bt, _) = pol.radii(2, 2, 100, 10);
        let root = (14.0 * 8000f64.ln() / 10.0).sqrt();
        assert!((br - 3.0 * root).abs() < 1e-12);
        assert!((bt - 2.0 * root).abs() < 1e-12);
        assert!(pol.with_scale(-1.0).check().is_err());
        assert!(ConfidencePolicy { delta: 1.0, ..pol }.check().is_err());
    }
}
