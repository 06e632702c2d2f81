mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use ucrl_smdp::env::{
    build_grid_mdp, build_lower_bound_smdp, lower_bound_diameter, lower_bound_optimal_gain, GridConfig,
    LowerBoundConfig,
};
use ucrl_smdp::model::{ActionSpec, Distribution, ModelSpec, Outcome, SmdpModel, StateSpec};
use ucrl_smdp::planning::{
    default_tau, diameter, equivalent_diameter_check, extended_value_iteration, gain_oracle, optimistic_transition,
    optimistic_value, policy_gain, uniformize, value_iteration, value_order, BoundedParameterSmdp,
};

use common::{random_smdp, row_dot};

/// max uᵀp over {p in the simplex, |p − p̂|₁ ≤ β} by enumerating the vertices
/// of every orthant piece of the ball.
fn brute_force_l1(p_hat: &[f64], beta: f64, u: &[f64]) -> f64 {
    let n = p_hat.len();
    let mut best = f64::NEG_INFINITY;
    for signs in 0..(1u32 << n) {
        let sigma: Vec<f64> = (0..n).map(|j| if signs >> j & 1 == 1 { 1.0 } else { -1.0 }).collect();
        // inequality rows g·p ≤ h
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for j in 0..n {
            let mut g = vec![0.0; n];
            g[j] = -sigma[j];
            rows.push((g, -sigma[j] * p_hat[j]));
            let mut g = vec![0.0; n];
            g[j] = -1.0;
            rows.push((g, 0.0));
        }
        rows.push((sigma.clone(), beta + sigma.iter().zip(p_hat).map(|(s, p)| s * p).sum::<f64>()));
        let m = rows.len();
        let mut pick = vec![0usize; n - 1];
        // all (n − 1)-subsets of the inequality rows
        fn subsets(start: usize, depth: usize, m: usize, pick: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if depth == pick.len() {
                out.push(pick.clone());
                return;
            }
            for i in start..m {
                pick[depth] = i;
                subsets(i + 1, depth + 1, m, pick, out);
            }
        }
        let mut all = Vec::new();
        subsets(0, 0, m, &mut pick, &mut all);
        for set in all {
            let mut a = DMatrix::<f64>::zeros(n, n);
            let mut b = DVector::<f64>::zeros(n);
            for j in 0..n {
                a[(0, j)] = 1.0;
            }
            b[0] = 1.0;
            for (r, &i) in set.iter().enumerate() {
                for j in 0..n {
                    a[(r + 1, j)] = rows[i].0[j];
                }
                b[r + 1] = rows[i].1;
            }
            let Some(p) = a.lu().solve(&b) else { continue };
            let feasible = rows.iter().all(|(g, h)| g.iter().zip(p.iter()).map(|(x, y)| x * y).sum::<f64>() <= h + 1e-9);
            if feasible {
                best = best.max(p.iter().zip(u).map(|(x, y)| x * y).sum());
            }
        }
    }
    best
}

fn sparse(p: &[f64]) -> Vec<(usize, f64)> {
    p.iter().copied().enumerate().filter(|e| e.1 > 0.0).collect()
}

fn simplex_strategy() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=4).prop_flat_map(|n| prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..1.0], n)).prop_filter_map(
        "nonzero mass",
        |raw| {
            let total: f64 = raw.iter().sum();
            (total > 0.0).then(|| raw.iter().map(|x| x / total).collect())
        },
    )
}

#[test]
fn l1_step_moves_mass_from_worst_to_best() {
    let p_hat = [0.25; 4];
    let u = [0.0, 1.0, 2.0, 3.0];
    let (order, rank) = value_order(&u);
    let p = optimistic_transition(&sparse(&p_hat), 0.3, &order, &rank);
    let dense: Vec<f64> = (0..4).map(|j| p.iter().filter(|e| e.0 == j).map(|e| e.1).sum()).collect();
    let expect = [0.10, 0.25, 0.25, 0.40];
    for j in 0..4 {
        assert!((dense[j] - expect[j]).abs() < 1e-12, "{dense:?}");
    }
    assert!((row_dot(&p, &u) - brute_force_l1(&p_hat, 0.3, &u)).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn l1_step_is_optimal(p_hat in simplex_strategy(), beta in 0.0f64..2.5, seed in any::<u64>()) {
        let n = p_hat.len();
        let u: Vec<f64> = (0..n).map(|j| ((seed >> (8 * j)) & 0xff) as f64 / 25.0).collect();
        let (order, rank) = value_order(&u);
        let row = sparse(&p_hat);
        let p = optimistic_transition(&row, beta, &order, &rank);
        let total: f64 = p.iter().map(|e| e.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|e| e.1 >= 0.0));
        let dist: f64 = (0..n)
            .map(|j| (p.iter().filter(|e| e.0 == j).map(|e| e.1).sum::<f64>() - p_hat[j]).abs())
            .sum();
        prop_assert!(dist <= beta + 1e-12);
        let oracle = brute_force_l1(&p_hat, beta, &u);
        prop_assert!((row_dot(&p, &u) - oracle).abs() < 1e-9, "fast {} brute {}", row_dot(&p, &u), oracle);
        let mut scratch = Vec::new();
        let v = optimistic_value(&row, beta, &u, order[0], &rank, &mut scratch);
        prop_assert!((v - oracle).abs() < 1e-9);
    }

    #[test]
    fn evi_span_stays_below_scaled_diameter(seed in 0u64..1000, width in 0.0f64..1.0) {
        let model = random_smdp(seed, 3, 2);
        let mut set = BoundedParameterSmdp::point(&model);
        for s in 0..3 {
            for a in 0..2 {
                let w = width * (1.0 + ((seed + 3 * s as u64 + a as u64) % 5) as f64) / 5.0;
                set.beta_r[s][a] = w;
                set.beta_tau[s][a] = w;
                set.beta_p[s][a] = w;
            }
        }
        prop_assert!(set.contains(&model));
        let tau = default_tau(&model);
        let sol = extended_value_iteration(&set, tau, 1e-6).unwrap();
        let bound = model.r_max() * diameter(&model).unwrap() / tau + 1e-6;
        let worst = sol.span_history.iter().copied().fold(0.0, f64::max);
        prop_assert!(worst <= bound, "span {} bound {}", worst, bound);
        let (rho, _) = gain_oracle(&model).unwrap();
        prop_assert!(sol.gain >= rho - 1e-6);
    }
}

#[test]
fn value_iteration_agrees_with_policy_enumeration() {
    for seed in 0..20 {
        let model = random_smdp(100 + seed, 3, 2);
        let (rho, _) = gain_oracle(&model).unwrap();
        let sol = value_iteration(&uniformize(&model, default_tau(&model)).unwrap(), 1e-9).unwrap();
        assert!((sol.gain - rho).abs() <= 1e-9 + 1e-9, "seed {seed}: {} vs {rho}", sol.gain);
        let g = policy_gain(&model, &sol.policy).unwrap();
        assert!(g.iter().all(|x| (x - rho).abs() < 1e-8), "greedy policy is optimal");
    }
}

#[test]
fn lower_bound_without_gap_has_half_reward_rate() {
    // with ε = η = 0 every action is equivalent and half the time is spent in s1
    let c = LowerBoundConfig { epsilon: 0.0, eta: 0.0, ..Default::default() };
    let model = build_lower_bound_smdp(&c).unwrap();
    let x_bar = 0.5 * c.r_max * c.t_max * (c.tau_bar / c.t_max);
    let expect = x_bar / (2.0 * c.tau_bar);
    let sol = value_iteration(&uniformize(&model, default_tau(&model)).unwrap(), 1e-12).unwrap();
    assert!((sol.gain - expect).abs() < 1e-9);
    assert!((lower_bound_optimal_gain(&c) - expect).abs() < 1e-12);
}

#[test]
fn grid_diameter_and_equivalent_diameter() {
    for d in [3, 5, 10] {
        let grid = build_grid_mdp(&GridConfig::new(d, 1)).unwrap().into_smdp();
        assert!((diameter(&grid).unwrap() - (2 * d - 2) as f64).abs() < 1e-9);
        let (dm, deq) = equivalent_diameter_check(&grid, 0.5).unwrap();
        assert!((deq - 2.0 * dm).abs() < 1e-6);
    }
    let c = LowerBoundConfig::default();
    let model = build_lower_bound_smdp(&c).unwrap();
    let tau = default_tau(&model);
    let (dm, deq) = equivalent_diameter_check(&model, tau).unwrap();
    assert!((dm - lower_bound_diameter(&c)).abs() < 1e-9);
    assert!((deq - c.tau_bar / (c.delta * tau)).abs() < 1e-6);
}

#[test]
fn smdp_with_random_holding_keeps_diameter_identity() {
    for seed in 0..5 {
        let model = random_smdp(seed, 4, 2);
        for tau in [0.3, 0.6, 0.95] {
            let (dm, deq) = equivalent_diameter_check(&model, tau).unwrap();
            assert!((dm - tau * deq).abs() < 1e-6, "seed {seed} tau {tau}");
        }
    }
}

#[test]
fn single_policy_gain_is_its_unichain_gain() {
    let spec = ModelSpec {
        r_max: 2.0,
        tau_min: 1.0,
        tau_max: 3.0,
        tails: None,
        states: vec![
            StateSpec { actions: vec![ActionSpec::new(vec![Outcome::fixed(1, 1.0, 2.0, 1.0)])] },
            StateSpec {
                actions: vec![ActionSpec::new(vec![Outcome::new(
                    0,
                    1.0,
                    Distribution::dirac(0.0),
                    Distribution::two_point(1.0, 5.0, 0.25),
                )])],
            },
        ],
    };
    let model = SmdpModel::new(spec).unwrap();
    let (rho, _) = gain_oracle(&model).unwrap();
    assert!((rho - 2.0 / 3.0).abs() < 1e-12);
}
