//! Per-step regret bookkeeping and its CSV form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One decision step. `tn` and `cum_reward` are the running totals after the
/// step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub i: u64,
    pub s: usize,
    pub a: usize,
    pub tau: f64,
    pub r: f64,
    pub tn: f64,
    pub cum_reward: f64,
}

/// Which records a ledger keeps. Totals are always exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LedgerDetail {
    Full,
    /// Every step up to `dense_until`, then about `per_decade` log-spaced
    /// steps per factor of ten, plus the final step.
    Checkpoints { dense_until: u64, per_decade: u32 },
}

impl Default for LedgerDetail {
    fn default() -> Self {
        LedgerDetail::Checkpoints { dense_until: 1000, per_decade: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    rho_star: f64,
    detail: LedgerDetail,
    records: Vec<Record>,
    last: Option<Record>,
    next_checkpoint: f64,
    steps: u64,
    duration: f64,
    reward: f64,
}

pub const CSV_HEADER: [&str; 8] = ["i", "s", "a", "tau", "r", "Tn", "cum_reward", "regret"];

/// Seventeen significant digits, enough to round-trip any f64.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

impl RegretLedger {
    pub fn new(rho_star: f64, detail: LedgerDetail) -> Self {
        let next_checkpoint = match detail {
            LedgerDetail::Full => 0.0,
            LedgerDetail::Checkpoints { dense_until, .. } => dense_until as f64 + 1.0,
        };
        RegretLedger {
            rho_star,
            detail,
            records: Vec::new(),
            last: None,
            next_checkpoint,
            steps: 0,
            duration: 0.0,
            reward: 0.0,
        }
    }

    pub fn rho_star(&self) -> f64 {
        self.rho_star
    }

    pub fn detail(&self) -> LedgerDetail {
        self.detail
    }

    pub fn push(&mut self, s: usize, a: usize, tau: f64, r: f64) -> Result<()> {
        if !(tau > 0.0 && tau.is_finite() && r.is_finite()) {
            return Err(Error::RunAbort(format!("step {} produced holding {tau} and reward {r}", self.steps + 1)));
        }
        self.steps += 1;
        self.duration += tau;
        self.reward += r;
        let rec = Record { i: self.steps, s, a, tau, r, tn: self.duration, cum_reward: self.reward };
        let keep = match self.detail {
            LedgerDetail::Full => true,
            LedgerDetail::Checkpoints { dense_until, per_decade } => {
                if self.steps <= dense_until {
                    true
                } else if self.steps as f64 >= self.next_checkpoint {
                    let factor = 10f64.powf(1.0 / per_decade.max(1) as f64);
                    while self.next_checkpoint <= self.steps as f64 {
                        self.next_checkpoint = (self.next_checkpoint * factor).max(self.next_checkpoint + 1.0);
                    }
                    true
                } else {
                    false
                }
            }
        };
        if keep {
            self.records.push(rec);
            self.last = None;
        } else {
            self.last = Some(rec);
        }
        Ok(())
    }

    /// Number of decision steps n.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Elapsed time T_n.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn total_reward(&self) -> f64 {
        self.reward
    }

    /// Δ = T_n ρ* − Σ r.
    pub fn regret(&self) -> f64 {
        self.duration * self.rho_star - self.reward
    }

    /// Kept records, always ending with the latest step.
    pub fn records(&self) -> Vec<Record> {
        let mut out = self.records.clone();
        out.extend(self.last);
        out
    }

    pub fn actions(&self) -> Vec<usize> {
        self.records().iter().map(|r| r.a).collect()
    }

    pub fn write_csv_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for rec in self.records() {
            w.write_record([
                rec.i.to_string(),
                rec.s.to_string(),
                rec.a.to_string(),
                fmt17(rec.tau),
                fmt17(rec.r),
                fmt17(rec.tn),
                fmt17(rec.cum_reward),
                fmt17(rec.tn * self.rho_star - rec.cum_reward),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv_to(std::io::BufWriter::new(file))
    }
}

/// A parsed ledger row, regret included.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct LedgerRow {
    pub i: u64,
    pub s: usize,
    pub a: usize,
    pub tau: f64,
    pub r: f64,
    #[serde(rename = "Tn")]
    pub tn: f64,
    pub cum_reward: f64,
    pub regret: f64,
}

pub fn read_ledger_from<R: Read>(reader: R) -> Result<Vec<LedgerRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected ledger header {header:?}")));
    }
    rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_ledger(path: impl AsRef<Path>) -> Result<Vec<LedgerRow>> {
    read_ledger_from(std::fs::File::open(path)?)
}

/// Piecewise-linear interpolation of `(x, y)` samples at `x`, clamped to the
/// end values outside the sampled range. `points` must be sorted by `x`.
pub fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    match points {
        [] => f64::NAN,
        [only] => only.1,
        _ => {
            if x <= points[0].0 {
                return points[0].1;
            }
            let last = points[points.len() - 1];
            if x >= last.0 {
                return last.1;
            }
            let k = points.partition_point(|p| p.0 <= x);
            let (x0, y0) = points[k - 1];
            let (x1, y1) = points[k];
            if x1 == x0 {
                y1
            } else {
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

/// The two parts of the regret of an options run measured at primitive
/// granularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    /// T_n ρ*(M) minus the primitive reward.
    pub total: f64,
    /// T_n ρ*(M_O) minus the option-level reward.
    pub smdp_regret: f64,
    /// T_n (ρ*(M) − ρ*(M_O)).
    pub linear_term: f64,
}

impl Decomposition {
    pub fn residual(&self) -> f64 {
        self.total - self.smdp_regret - self.linear_term
    }
}

/// Splits the regret of an options run. `ledger` must hold the option-level
/// rewards and `primitive_reward` the sum of the primitive rewards of the
/// same run; a mismatch between the two means the ledger came from another
/// run.
pub fn regret_decomposition(
    rho_base: f64,
    rho_options: f64,
    ledger: &RegretLedger,
    primitive_reward: f64,
) -> Result<Decomposition> {
    let option_reward = ledger.total_reward();
    let scale = 1.0f64.max(option_reward.abs());
    if (option_reward - primitive_reward).abs() > 1e-9 * scale {
        return Err(Error::Validation(format!(
            "ledger reward {option_reward} does not match primitive reward {primitive_reward}"
        )));
    }
    let t = ledger.duration();
    Ok(Decomposition {
        total: t * rho_base - primitive_reward,
        smdp_regret: t * rho_options - option_reward,
        linear_term: t * (rho_base - rho_options),
    })
}
