//! Reference optimistic learner for MDPs with unit holding times. It keeps
//! its own counts and radii and only borrows the inner maximization over the
//! L1 ball.

use rand::SeedableRng;

use super::{LedgerDetail, RegretLedger};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::model::SimRng;
use crate::planning::{optimistic_value, value_order, MAX_SWEEPS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlainUcrl {
    pub delta: f64,
    pub r_max: f64,
    pub seed: u64,
    pub initial_state: usize,
    /// Weight of the current value in the aperiodic backup.
    pub aperiodicity: f64,
}

impl PlainUcrl {
    pub fn new(delta: f64, r_max: f64, seed: u64) -> Self {
        PlainUcrl { delta, r_max, seed, initial_state: 0, aperiodicity: 0.9 }
    }

    /// Runs for `steps` decisions against `rho_star` and returns the full
    /// ledger.
    pub fn run(&self, env: &mut impl Environment, steps: u64, rho_star: f64) -> Result<RegretLedger> {
        let ns = env.num_states();
        let shape: Vec<usize> = (0..ns).map(|s| env.num_actions(s)).collect();
        let na = shape.iter().copied().max().unwrap_or(0);
        let mut n = shape.iter().map(|&k| vec![0u64; k]).collect::<Vec<_>>();
        let mut nu = n.clone();
        let mut rsum = shape.iter().map(|&k| vec![0.0f64; k]).collect::<Vec<_>>();
        let mut succ: Vec<Vec<Vec<u64>>> = shape.iter().map(|&k| vec![vec![0u64; ns]; k]).collect();
        let mut rng = SimRng::seed_from_u64(self.seed);
        let mut ledger = RegretLedger::new(rho_star, LedgerDetail::Full);
        let mut s = self.initial_state;
        let mut t: u64 = 1;
        let mut scratch = Vec::new();
        while ledger.steps() < steps {
            let t_k = t as f64;
            let (sf, af) = (ns as f64, na as f64);
            let log_sa = (2.0 * sf * af * t_k / self.delta).ln();
            let log_a = (2.0 * af * t_k / self.delta).ln();
            let mut r_opt = Vec::with_capacity(ns);
            let mut rows = Vec::with_capacity(ns);
            let mut beta_p = Vec::with_capacity(ns);
            for x in 0..ns {
                let (mut ro, mut rw, mut bp) = (Vec::new(), Vec::new(), Vec::new());
                for a in 0..shape[x] {
                    let visits = n[x][a];
                    let nn = visits.max(1) as f64;
                    let r_hat = if visits == 0 { 0.0 } else { rsum[x][a] / nn };
                    let beta_r = self.r_max * (14.0 * log_sa / nn).sqrt();
                    ro.push((r_hat + beta_r).min(self.r_max));
                    bp.push((14.0 * sf * log_a / nn).sqrt());
                    let row: Vec<(usize, f64)> = if visits == 0 {
                        Vec::new()
                    } else {
                        (0..ns).filter(|&j| succ[x][a][j] > 0).map(|j| (j, succ[x][a][j] as f64 / nn)).collect()
                    };
                    rw.push(row);
                }
                r_opt.push(ro);
                rows.push(rw);
                beta_p.push(bp);
            }
            let policy = self.plan(&r_opt, &rows, &beta_p, self.r_max / t_k.sqrt(), &mut scratch)?;
            loop {
                if ledger.steps() >= steps {
                    break;
                }
                let a = policy[s];
                if nu[s][a] >= n[s][a].max(1) {
                    break;
                }
                let step = env.step(s, a, &mut rng)?;
                nu[s][a] += 1;
                rsum[s][a] += step.reward;
                succ[s][a][step.next] += 1;
                ledger.push(s, a, step.holding, step.reward)?;
                t += 1;
                s = step.next;
            }
            for x in 0..ns {
                for a in 0..shape[x] {
                    n[x][a] += nu[x][a];
                    nu[x][a] = 0;
                }
            }
        }
        Ok(ledger)
    }

    fn plan(
        &self,
        r_opt: &[Vec<f64>],
        rows: &[Vec<Vec<(usize, f64)>>],
        beta_p: &[Vec<f64>],
        epsilon: f64,
        scratch: &mut Vec<(usize, f64)>,
    ) -> Result<Vec<usize>> {
        let ns = r_opt.len();
        let mut u = vec![0.0; ns];
        let mut next = vec![0.0; ns];
        let mut policy = vec![0; ns];
        for _ in 0..MAX_SWEEPS {
            let (order, rank) = value_order(&u);
            for x in 0..ns {
                let mut best = f64::NEG_INFINITY;
                for a in 0..r_opt[x].len() {
                    let pv = optimistic_value(&rows[x][a], beta_p[x][a], &u, order[0], &rank, scratch);
                    let v = r_opt[x][a] + self.aperiodicity * (pv - u[x]);
                    if v > best {
                        best = v;
                        policy[x] = a;
                    }
                }
                next[x] = best + u[x];
            }
            let (mut hi, mut lo, mut vmin) = (f64::NEG_INFINITY, f64::INFINITY, f64::INFINITY);
            for x in 0..ns {
                hi = hi.max(next[x] - u[x]);
                lo = lo.min(next[x] - u[x]);
                vmin = vmin.min(next[x]);
            }
            for v in next.iter_mut() {
                *v -= vmin;
            }
            if hi - lo < epsilon {
                return Ok(policy);
            }
            std::mem::swap(&mut u, &mut next);
        }
        Err(Error::IterationCap(MAX_SWEEPS))
    }
}
