use std::fmt;

use super::{ModelSpec, SmdpModel, MASS_TOLERANCE};
use crate::linalg;

/// Relative slack on the holding-time and reward-rate bounds.
const BOUND_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub state: Option<usize>,
    pub action: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, state: Option<usize>, action: Option<usize>, message: impl Into<String>) {
        self.violations.push(Violation { state, action, message: message.into() });
    }

    /// Whether some violation is reported at exactly `(s, a)`.
    pub fn has_violation_at(&self, s: usize, a: usize) -> bool {
        self.violations.iter().any(|v| v.state == Some(s) && v.action == Some(a))
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.state, self.action) {
            (Some(s), Some(a)) => write!(f, "(s={s}, a={a}): {}", self.message),
            (Some(s), None) => write!(f, "(s={s}): {}", self.message),
            _ => write!(f, "{}", self.message),
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every model invariant and reports each violation with coordinates.
pub fn validate(spec: &ModelSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = spec.states.len();
    if n == 0 {
        report.push(None, None, "model has no states");
        return report;
    }
    if !(spec.r_max.is_finite() && spec.r_max > 0.0) {
        report.push(None, None, format!("r_max = {} must be positive", spec.r_max));
    }
    if !(spec.tau_min > 0.0 && spec.tau_min <= spec.tau_max && spec.tau_max.is_finite()) {
        report.push(
            None,
            None,
            format!("need 0 < tau_min <= tau_max, got [{}, {}]", spec.tau_min, spec.tau_max),
        );
    }

    let mut structurally_sound = true;
    for (s, st) in spec.states.iter().enumerate() {
        if st.actions.is_empty() {
            report.push(Some(s), None, "state has no actions");
            structurally_sound = false;
        }
        for (a, act) in st.actions.iter().enumerate() {
            let at = |r: &mut ValidationReport, m: String| r.push(Some(s), Some(a), m);
            if act.outcomes.is_empty() {
                at(&mut report, "action has no outcomes".into());
                structurally_sound = false;
                continue;
            }
            if let Some(c) = act.coupling {
                if !c.is_finite() {
                    at(&mut report, "coupling factor is not finite".into());
                }
            }
            let mut total = 0.0;
            for o in &act.outcomes {
                if o.next >= n {
                    at(&mut report, format!("successor {} out of range", o.next));
                    structurally_sound = false;
                }
                if !(o.prob.is_finite() && o.prob >= 0.0) {
                    at(&mut report, format!("probability {} is negative or not finite", o.prob));
                }
                total += o.prob;
                match (&o.reward, act.coupling) {
                    (Some(_), Some(_)) => {
                        at(&mut report, "coupled action must not declare a reward law".into())
                    }
                    (None, None) => at(&mut report, "missing reward law".into()),
                    (Some(r), None) => {
                        if let Err(e) = r.check() {
                            at(&mut report, format!("reward to {}: {e}", o.next));
                        }
                    }
                    (None, Some(_)) => {}
                }
                if let Err(e) = o.holding.check() {
                    at(&mut report, format!("holding to {}: {e}", o.next));
                    structurally_sound = false;
                } else if !holding_positive(&o.holding) {
                    at(&mut report, format!("holding to {} has non-positive support", o.next));
                }
            }
            if (total - 1.0).abs() > MASS_TOLERANCE {
                at(&mut report, format!("transition row sums to {total}"));
            }
        }
    }
    if !structurally_sound {
        return report;
    }

    let model = SmdpModel::new_unchecked(spec.clone());
    for s in 0..n {
        for a in 0..model.num_actions(s) {
            let t = model.tau_bar(s, a);
            let r = model.r_bar(s, a);
            if t < spec.tau_min * (1.0 - BOUND_TOLERANCE) || t > spec.tau_max * (1.0 + BOUND_TOLERANCE) {
                report.push(
                    Some(s),
                    Some(a),
                    format!("expected holding {t} outside [{}, {}]", spec.tau_min, spec.tau_max),
                );
            }
            if t > 0.0 && r > spec.r_max * t * (1.0 + BOUND_TOLERANCE) + BOUND_TOLERANCE {
                report.push(Some(s), Some(a), format!("reward rate {} exceeds r_max {}", r / t, spec.r_max));
            }
        }
    }

    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            let mut succ: Vec<usize> = (0..model.num_actions(s))
                .flat_map(|a| model.row(s, a).iter().filter(|(_, p)| *p > 0.0).map(|(j, _)| *j))
                .collect();
            succ.sort_unstable();
            succ.dedup();
            succ
        })
        .collect();
    let components = linalg::strongly_connected_components(&adjacency);
    if components.len() > 1 {
        report.push(
            None,
            None,
            format!("model is not communicating ({} strongly connected components)", components.len()),
        );
    }
    report
}

fn holding_positive(d: &super::Distribution) -> bool {
    use super::Distribution;
    match d {
        Distribution::PhaseType(ph) => {
            ph.step_value.iter().flatten().all(|v| *v >= 0.0)
                && ph.exit_value.iter().all(|v| *v > 0.0)
        }
        _ => matches!(d.support_bounds(), Some((lo, _)) if lo > 0.0),
    }
}
