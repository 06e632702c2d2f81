//! Square grid with a reset target in the bottom-right corner.
//!
//! States are numbered row-major, `row * d + col`; the target is `d² − 1`.
//! Actions are 0 = left, 1 = right, 2 = up, 3 = down; moving into a wall
//! leaves the agent in place. The target has a single action that resets the
//! agent uniformly to one of the other cells and pays `r_max`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActionSpec, MdpModel, ModelSpec, Outcome, StateSpec};
use crate::options::{OptionSet, OptionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptionMode {
    /// Each option may stop after any number of steps up to m, uniformly.
    Interruptible,
    /// Each option runs exactly m steps, or to the wall.
    Deterministic,
    PrimitiveOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub d: usize,
    pub m: usize,
    pub r_max: f64,
    pub option_mode: OptionMode,
}

impl GridConfig {
    pub fn new(d: usize, m: usize) -> Self {
        GridConfig { d, m, r_max: 1.0, option_mode: OptionMode::Interruptible }
    }

    pub fn check(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Parameters(format!("grid side must be at least 2, got {}", self.d)));
        }
        if self.m < 1 || self.m >= self.d {
            return Err(Error::Parameters(format!("option length m = {} must lie in [1, d)", self.m)));
        }
        if !(self.r_max > 0.0) {
            return Err(Error::Parameters("r_max must be positive".into()));
        }
        Ok(())
    }

    pub fn target(&self) -> usize {
        self.d * self.d - 1
    }
}

const DIRECTIONS: [&str; 4] = ["left", "right", "up", "down"];

fn neighbour(d: usize, s: usize, dir: usize) -> usize {
    let (r, c) = (s / d, s % d);
    match dir {
        0 if c > 0 => s - 1,
        1 if c + 1 < d => s + 1,
        2 if r > 0 => s - d,
        3 if r + 1 < d => s + d,
        _ => s,
    }
}

/// Number of moves possible from `s` in direction `dir` before the wall.
fn distance_to_wall(d: usize, s: usize, dir: usize) -> usize {
    let (r, c) = (s / d, s % d);
    match dir {
        0 => c,
        1 => d - 1 - c,
        2 => r,
        _ => d - 1 - r,
    }
}

pub fn build_grid_mdp(config: &GridConfig) -> Result<MdpModel> {
    if config.d < 2 || !(config.r_max > 0.0) {
        return Err(Error::Parameters(format!("invalid grid configuration {config:?}")));
    }
    let d = config.d;
    let n = d * d;
    let target = n - 1;
    let mut states = Vec::with_capacity(n);
    for s in 0..n {
        let actions = if s == target {
            let mass = 1.0 / (n - 1) as f64;
            vec![ActionSpec::new((0..target).map(|j| Outcome::fixed(j, mass, config.r_max, 1.0)).collect()).labeled("reset")]
        } else {
            (0..4)
                .map(|dir| ActionSpec::new(vec![Outcome::fixed(neighbour(d, s, dir), 1.0, 0.0, 1.0)]).labeled(DIRECTIONS[dir]))
                .collect()
        };
        states.push(StateSpec { actions });
    }
    // rows of the reset sum to 1 only up to rounding for most d; renormalize
    // the last entry so the row is stochastic to machine precision
    let reset = &mut states[target].actions[0].outcomes;
    let head: f64 = reset[..reset.len() - 1].iter().map(|o| o.prob).sum();
    let last = reset.len() - 1;
    reset[last].prob = 1.0 - head;
    MdpModel::new(ModelSpec { r_max: config.r_max, tau_min: 1.0, tau_max: 1.0, tails: None, states })
}

fn reset_option(config: &GridConfig) -> OptionSpec {
    let target = config.target();
    OptionSpec {
        label: "reset".into(),
        initiation: vec![target],
        termination: (0..target).map(|s| (s, 1.0)).collect(),
        policy: vec![(target, 0)],
    }
}

fn line_options(config: &GridConfig, deterministic: bool) -> OptionSet {
    let d = config.d;
    let target = config.target();
    let mut options = Vec::with_capacity(4 * target + 1);
    for s in 0..target {
        for dir in 0..4 {
            let len = config.m.min(distance_to_wall(d, s, dir));
            let label = format!("{} from {s}", DIRECTIONS[dir]);
            if len == 0 {
                // against the wall: one step that stays in place
                options.push(OptionSpec { label, initiation: vec![s], termination: vec![(s, 1.0)], policy: vec![(s, dir)] });
                continue;
            }
            let mut cells = vec![s];
            for _ in 0..len {
                cells.push(neighbour(d, *cells.last().unwrap(), dir));
            }
            let termination = (1..=len)
                .map(|k| {
                    let beta = if deterministic {
                        if k == len { 1.0 } else { 0.0 }
                    } else {
                        1.0 / (len - k + 1) as f64
                    };
                    (cells[k], beta)
                })
                .collect();
            let policy = cells[..len].iter().map(|&x| (x, dir)).collect();
            options.push(OptionSpec { label, initiation: vec![s], termination, policy });
        }
    }
    options.push(reset_option(config));
    OptionSet::new(options)
}

/// Options that move up to `m` cells in a cardinal direction, stopping after
/// exactly k ≤ m steps with probability 1/m (fewer near walls).
pub fn build_grid_options(config: &GridConfig) -> Result<OptionSet> {
    config.check()?;
    Ok(line_options(config, false))
}

/// Options that always move exactly `m` cells, or up to the wall.
pub fn build_grid_deterministic_options(config: &GridConfig) -> Result<OptionSet> {
    config.check()?;
    Ok(line_options(config, true))
}

/// Optimal gain of the grid: one reward per cycle of reset plus the mean
/// Manhattan distance back to the corner, (d+1)/(d²+d+1) per unit of r_max.
pub fn grid_optimal_gain(d: usize, r_max: f64) -> f64 {
    let d = d as f64;
    r_max * (d + 1.0) / (d * d + d + 1.0)
}
