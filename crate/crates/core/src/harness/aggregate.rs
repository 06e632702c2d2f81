//! Reduction of ledgers to per-(d, m) regret curves.

use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use super::theoretical_ratio;
use crate::error::{Error, Result};
use crate::learning::{fmt17, interpolate, LedgerRow};

pub const AGGREGATE_HEADER: [&str; 10] =
    ["d", "m", "seed_count", "Tn", "regret_opt_mean", "regret_opt_se", "regret_prim_mean", "regret_prim_se", "ratio", "tn_over_n"];

pub const THEORY_HEADER: [&str; 5] = ["d", "m", "source", "tn_over_n", "ratio"];

pub const WARNING_HEADER: [&str; 4] = ["d", "m", "Tn", "message"];

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct AggregateRow {
    pub d: usize,
    pub m: usize,
    pub seed_count: usize,
    #[serde(rename = "Tn")]
    pub tn: f64,
    pub regret_opt_mean: f64,
    pub regret_opt_se: f64,
    pub regret_prim_mean: f64,
    pub regret_prim_se: f64,
    pub ratio: f64,
    pub tn_over_n: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Warning {
    pub d: usize,
    pub m: usize,
    #[serde(rename = "Tn")]
    pub tn: f64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AggregateResult {
    pub rows: Vec<AggregateRow>,
    pub warnings: Vec<Warning>,
}

impl AggregateResult {
    /// Last row of each (d, m) curve.
    pub fn final_rows(&self) -> Vec<AggregateRow> {
        let mut out: Vec<AggregateRow> = Vec::new();
        for row in &self.rows {
            match out.last_mut() {
                Some(last) if last.d == row.d && last.m == row.m => *last = *row,
                _ => out.push(*row),
            }
        }
        out
    }

    /// Rows of one curve.
    pub fn curve(&self, d: usize, m: usize) -> Vec<AggregateRow> {
        self.rows.iter().filter(|r| r.d == d && r.m == m).copied().collect()
    }
}

/// Ledgers of one (d, m) cell, one per seed for each arm, paired by seed.
pub struct Cell<'a> {
    pub d: usize,
    pub m: usize,
    pub options: Vec<&'a [LedgerRow]>,
    pub primitive: Vec<&'a [LedgerRow]>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Evaluation times: log-spaced from 10 up to `end`, with `end` itself last.
pub fn time_grid(end: f64, per_decade: u32) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut j = per_decade as i32;
    loop {
        let t = 10f64.powf(j as f64 / per_decade as f64);
        if t >= end {
            break;
        }
        grid.push(t);
        j += 1;
    }
    grid.push(end);
    grid
}

/// Aggregates one cell. At each grid time the options arm is read at its
/// first record reaching that time, and the primitive arm is interpolated at
/// the options arm's elapsed time.
pub fn aggregate_cell(cell: &Cell<'_>, per_decade: u32, result: &mut AggregateResult) -> Result<()> {
    if cell.options.len() != cell.primitive.len() || cell.options.is_empty() {
        return Err(Error::Validation(format!(
            "cell d={} m={} has {} option ledgers and {} primitive ledgers",
            cell.d,
            cell.m,
            cell.options.len(),
            cell.primitive.len()
        )));
    }
    if cell.options.iter().chain(&cell.primitive).any(|l| l.is_empty()) {
        return Err(Error::Validation(format!("empty ledger in cell d={} m={}", cell.d, cell.m)));
    }
    let end = cell.options.iter().map(|l| l[l.len() - 1].tn).fold(f64::INFINITY, f64::min);
    let prim_points: Vec<Vec<(f64, f64)>> =
        cell.primitive.iter().map(|l| l.iter().map(|r| (r.tn, r.regret)).collect()).collect();
    for t in time_grid(end, per_decade) {
        let mut opt = Vec::with_capacity(cell.options.len());
        let mut prim = Vec::with_capacity(cell.options.len());
        let mut times = Vec::with_capacity(cell.options.len());
        let mut ratios = Vec::with_capacity(cell.options.len());
        for (ledger, points) in cell.options.iter().zip(&prim_points) {
            let k = ledger.partition_point(|r| r.tn < t).min(ledger.len() - 1);
            let rec = ledger[k];
            opt.push(rec.regret);
            prim.push(interpolate(points, rec.tn));
            times.push(rec.tn);
            ratios.push(rec.tn / rec.i as f64);
        }
        let (opt_mean, opt_se) = mean_se(&opt);
        let (prim_mean, prim_se) = mean_se(&prim);
        let tn = mean_se(&times).0;
        let ratio = if prim_mean.is_finite() && opt_mean.is_finite() && prim_mean.abs() > 1e-12 {
            opt_mean / prim_mean
        } else {
            result.warnings.push(Warning {
                d: cell.d,
                m: cell.m,
                tn,
                message: format!("primitive regret {prim_mean} too small for a ratio"),
            });
            f64::NAN
        };
        result.rows.push(AggregateRow {
            d: cell.d,
            m: cell.m,
            seed_count: cell.options.len(),
            tn,
            regret_opt_mean: opt_mean,
            regret_opt_se: opt_se,
            regret_prim_mean: prim_mean,
            regret_prim_se: prim_se,
            ratio,
            tn_over_n: mean_se(&ratios).0,
        });
    }
    Ok(())
}

pub fn emit_csv_to<W: Write>(result: &AggregateResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(AGGREGATE_HEADER)?;
    for r in &result.rows {
        w.write_record([
            r.d.to_string(),
            r.m.to_string(),
            r.seed_count.to_string(),
            fmt17(r.tn),
            fmt17(r.regret_opt_mean),
            fmt17(r.regret_opt_se),
            fmt17(r.regret_prim_mean),
            fmt17(r.regret_prim_se),
            fmt17(r.ratio),
            fmt17(r.tn_over_n),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(result: &AggregateResult, path: impl AsRef<Path>) -> Result<()> {
    emit_csv_to(result, std::io::BufWriter::new(std::fs::File::create(path)?))
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, want: &[&str]) -> Result<()> {
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != want {
        return Err(Error::Parse(format!("expected columns {want:?}, found {header:?}")));
    }
    Ok(())
}

pub fn read_aggregate_from<R: Read>(reader: R) -> Result<Vec<AggregateRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &AGGREGATE_HEADER)?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn read_aggregate(path: impl AsRef<Path>) -> Result<Vec<AggregateRow>> {
    read_aggregate_from(std::fs::File::open(path)?)
}

pub fn emit_warnings(result: &AggregateResult, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(WARNING_HEADER)?;
    for x in &result.warnings {
        w.write_record([x.d.to_string(), x.m.to_string(), fmt17(x.tn), x.message.clone()])?;
    }
    w.flush()?;
    Ok(())
}

/// Companion table of the bound ratio, once with T_n/n = (m + 1)/2 and once
/// with the measured final T_n/n.
pub fn emit_theory_csv(result: &AggregateResult, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(THEORY_HEADER)?;
    for r in result.final_rows() {
        let closed = (r.m as f64 + 1.0) / 2.0;
        for (source, tn_over_n) in [("closed-form", closed), ("empirical", r.tn_over_n)] {
            w.write_record([
                r.d.to_string(),
                r.m.to_string(),
                source.to_string(),
                fmt17(tn_over_n),
                fmt17(theoretical_ratio(r.d, r.m, 1.0 / tn_over_n)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
