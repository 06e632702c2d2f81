mod common;

use rand::SeedableRng;
use ucrl_smdp::env::{
    build_grid_deterministic_options, build_grid_mdp, build_grid_options, grid_optimal_gain, Environment, GridConfig,
    LiftedEnv,
};
use ucrl_smdp::model::{SimRng, StationaryPolicy};
use ucrl_smdp::options::{analyze_holding, compile, lift_policy, HoldingClass, OptionSet, OptionSpec, OptionTables};
use ucrl_smdp::planning::{default_tau, diameter, uniformize, value_iteration};

use common::random_option_fixture;

const LEFT: usize = 0;
const RIGHT: usize = 1;
const DOWN: usize = 3;

fn grid_option(set: &OptionSet, s: usize, dir: usize) -> &OptionSpec {
    &set.options[4 * s + dir]
}

fn optimal_gain(model: &ucrl_smdp::model::SmdpModel) -> f64 {
    value_iteration(&uniformize(model, default_tau(model)).unwrap(), 1e-12).unwrap().gain
}

#[test]
fn duration_law_near_the_wall() {
    let cfg = GridConfig::new(10, 3);
    let base = build_grid_mdp(&cfg).unwrap();
    let set = build_grid_options(&cfg).unwrap();
    // (4, 2): two cells from the left wall
    let start = 4 * 10 + 2;
    let a = analyze_holding(&base, grid_option(&set, start, LEFT), start).unwrap();
    assert_eq!(a.pmf.len(), 2);
    assert!(a.pmf.iter().all(|p| (p - 0.5).abs() < 1e-15));
    assert!((a.mean_holding - 1.5).abs() < 1e-12);
    assert_eq!(a.classification, HoldingClass::BoundedHolding);

    let det = build_grid_deterministic_options(&cfg).unwrap();
    let start = 5 * 10 + 5;
    let a = analyze_holding(&base, grid_option(&det, start, LEFT), start).unwrap();
    assert_eq!(a.pmf, vec![0.0, 0.0, 1.0]);
}

#[test]
fn grid_options_keep_the_optimal_gain_and_bound_the_diameter() {
    let d = 10;
    let base_d = (2 * d - 2) as f64;
    for m in [2, 3, 4] {
        let cfg = GridConfig::new(d, m);
        let base = build_grid_mdp(&cfg).unwrap();
        let compiled = compile(&base, &build_grid_options(&cfg).unwrap()).unwrap();
        let d_o = diameter(&compiled.model).unwrap();
        assert!(d_o >= base_d - 1e-9 && d_o <= base_d + (m * (m + 1)) as f64 + 1e-9, "m={m}: {d_o}");
        assert!((optimal_gain(&compiled.model) - grid_optimal_gain(d, 1.0)).abs() < 1e-9);
    }
}

#[test]
fn exact_length_options_stretch_the_diameter_but_not_the_gain() {
    let (d, m) = (6, 3);
    let cfg = GridConfig::new(d, m);
    let base = build_grid_mdp(&cfg).unwrap();
    let compiled = compile(&base, &build_grid_deterministic_options(&cfg).unwrap()).unwrap();
    let big_d = (2 * d - 2) as f64;
    let d_o = diameter(&compiled.model).unwrap();
    assert!(d_o >= big_d && d_o <= big_d * (1 + m * m) as f64, "{d_o}");
    assert!((optimal_gain(&compiled.model) - grid_optimal_gain(d, 1.0)).abs() < 1e-9);
}

#[test]
fn compiled_rows_match_monte_carlo() {
    let (base, set) = random_option_fixture(5);
    let compiled = compile(&base, &set).unwrap();
    let tables = OptionTables::new(&set, 4).unwrap();
    let mut rng = SimRng::seed_from_u64(17);
    let episodes = 1_000_000u64;
    for k in 0..compiled.model.num_states() {
        let start = compiled.states[k];
        let o = compiled.option(k, 0);
        let mut ends = [0u64; 4];
        let (mut hold, mut hold_sq) = (0.0, 0.0);
        for _ in 0..episodes {
            let mut x = start;
            let mut t = 0.0;
            loop {
                let a = tables.inner_action(o, x).unwrap();
                x = base.smdp().sample_unchecked(x, a, &mut rng).next;
                t += 1.0;
                if tables.terminates(o, x, &mut rng) {
                    break;
                }
            }
            ends[x] += 1;
            hold += t;
            hold_sq += t * t;
        }
        let row = compiled.model.dense_row(k, 0);
        for (j, &count) in ends.iter().enumerate() {
            let p = row[compiled.index_of[j].unwrap()];
            let freq = count as f64 / episodes as f64;
            let se = (p * (1.0 - p) / episodes as f64).sqrt();
            assert!((freq - p).abs() <= 4.0 * se + 1e-12, "state {start} end {j}: {freq} vs {p}");
        }
        let mean = hold / episodes as f64;
        let se = ((hold_sq / episodes as f64 - mean * mean) / episodes as f64).sqrt();
        assert!((mean - compiled.model.tau_bar(k, 0)).abs() <= 4.0 * se);
    }
}

#[test]
fn lifted_left_option_holds_two_steps_on_average() {
    let cfg = GridConfig::new(10, 3);
    let base = build_grid_mdp(&cfg).unwrap();
    let set = build_grid_options(&cfg).unwrap();
    let compiled = compile(&base, &set).unwrap();
    let mut env = LiftedEnv::new(&base, &compiled, &set).unwrap();
    let start = 5 * 10 + 5;
    let k = compiled.index_of[start].unwrap();
    let a = compiled.options_at[k].iter().position(|&o| o == 4 * start + LEFT).unwrap();
    let mut rng = SimRng::seed_from_u64(3);
    let runs = 1_000_000;
    let mut total = 0.0;
    for _ in 0..runs {
        let step = env.step(k, a, &mut rng).unwrap();
        assert_eq!(step.reward, 0.0);
        total += step.holding;
    }
    assert!((total / runs as f64 - 2.0).abs() < 0.01);
}

#[test]
fn greedy_option_policy_follows_a_shortest_path() {
    let cfg = GridConfig::new(8, 3);
    let base = build_grid_mdp(&cfg).unwrap();
    let set = build_grid_options(&cfg).unwrap();
    let compiled = compile(&base, &set).unwrap();
    let choice: Vec<usize> = (0..compiled.model.num_states())
        .map(|k| {
            let s = compiled.states[k];
            if s == cfg.target() {
                return 0;
            }
            let dir = if s % cfg.d + 1 < cfg.d { RIGHT } else { DOWN };
            compiled.options_at[k].iter().position(|&o| o == 4 * s + dir).unwrap()
        })
        .collect();
    let mut rng = SimRng::seed_from_u64(9);
    for start in [0, 13, 40] {
        let mut ctl = lift_policy(&compiled, &set, StationaryPolicy::new(choice.clone())).unwrap();
        let mut x = start;
        while x != cfg.target() {
            x = ctl.step(&base, x, &mut rng).unwrap().0.next;
        }
        let (r, c) = (start / cfg.d, start % cfg.d);
        assert_eq!(ctl.steps() as usize, 2 * (cfg.d - 1) - r - c);
    }
}

#[test]
fn one_step_options_replay_a_primitive_policy() {
    let (base, _) = random_option_fixture(2);
    let prim = OptionSet::new(
        (0..4)
            .flat_map(|s| {
                (0..2).map(move |a| OptionSpec {
                    label: String::new(),
                    initiation: vec![s],
                    termination: (0..4).map(|x| (x, 1.0)).collect(),
                    policy: vec![(s, a)],
                })
            })
            .collect(),
    );
    let compiled = compile(&base, &prim).unwrap();
    let policy = StationaryPolicy::new(vec![1, 0, 0, 1]);
    let mut ctl = lift_policy(&compiled, &prim, policy.clone()).unwrap();
    let (mut r1, mut r2) = (SimRng::seed_from_u64(4), SimRng::seed_from_u64(4));
    let (mut x, mut y) = (0, 0);
    for _ in 0..10_000 {
        let (step, stop) = ctl.step(&base, x, &mut r1).unwrap();
        assert!(stop);
        let direct = base.smdp().sample_transition(y, policy.choice[y], &mut r2).unwrap();
        assert_eq!(step, direct);
        x = step.next;
        y = direct.next;
    }
    assert_eq!(ctl.decisions(), ctl.steps());
}
