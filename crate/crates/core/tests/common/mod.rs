#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucrl_smdp::model::{ActionSpec, Distribution, MdpModel, ModelSpec, Outcome, SmdpModel, StateSpec};
use ucrl_smdp::options::{OptionSet, OptionSpec};

/// Random masses over `k` points, none below `floor`, summing to one exactly
/// in floating point.
pub fn simplex(rng: &mut ChaCha8Rng, k: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + floor).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = p[..k - 1].iter().sum();
    p[k - 1] = 1.0 - head;
    p
}

/// A communicating SMDP with full-support transitions, rewards on {0, 1, 2}
/// and holding times on {1, 2, 4}, both with random masses.
pub fn random_smdp(seed: u64, states: usize, actions: usize) -> SmdpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = ModelSpec { r_max: 2.0, tau_min: 1.0, tau_max: 4.0, tails: None, states: Vec::new() };
    for _ in 0..states {
        let mut acts = Vec::new();
        for _ in 0..actions {
            let p = simplex(&mut rng, states, 0.05);
            let outcomes = (0..states)
                .map(|j| {
                    let reward = Distribution::Table { support: vec![0.0, 1.0, 2.0], masses: simplex(&mut rng, 3, 0.0) };
                    let holding =
                        Distribution::Table { support: vec![1.0, 2.0, 4.0], masses: simplex(&mut rng, 3, 0.0) };
                    Outcome::new(j, p[j], reward, holding)
                })
                .collect();
            acts.push(ActionSpec::new(outcomes));
        }
        spec.states.push(StateSpec { actions: acts });
    }
    SmdpModel::new(spec).expect("fixture is valid")
}

/// uᵀp for a sparse row p.
pub fn row_dot(row: &[(usize, f64)], u: &[f64]) -> f64 {
    row.iter().map(|&(j, p)| p * u[j]).sum()
}

/// A 4-state MDP with two options that restart each other: one starts in
/// {0, 1}, the other in {2, 3}, both stop anywhere with random β.
pub fn random_option_fixture(seed: u64) -> (MdpModel, OptionSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 4;
    let states = (0..n)
        .map(|_| StateSpec {
            actions: (0..2)
                .map(|_| {
                    let p = simplex(&mut rng, n, 0.1);
                    let r = simplex(&mut rng, n, 0.0);
                    ActionSpec::new((0..n).map(|j| Outcome::fixed(j, p[j], r[j], 1.0)).collect())
                })
                .collect(),
        })
        .collect();
    let base = MdpModel::new(ModelSpec { r_max: 1.0, tau_min: 1.0, tau_max: 1.0, tails: None, states }).unwrap();
    let opt = |init: Vec<usize>, seed: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let beta = simplex(&mut r, n, 1.0);
        OptionSpec {
            label: String::new(),
            initiation: init,
            termination: (0..n).map(|s| (s, 0.2 + beta[s])).collect(),
            policy: (0..n).map(|s| (s, (s + seed as usize) % 2)).collect(),
        }
    };
    (base, OptionSet::new(vec![opt(vec![0, 1], seed + 1), opt(vec![2, 3], seed + 2)]))
}
