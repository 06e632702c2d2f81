mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use ucrl_smdp::env::{
    build_grid_mdp, build_grid_options, build_lower_bound_smdp, grid_optimal_gain, GridConfig, LiftedEnv,
    LowerBoundConfig, ModelEnv,
};
use ucrl_smdp::learning::{
    coverage_test, read_ledger_from, regret_decomposition, run, AgentConfig, Budget, ConfidencePolicy, LedgerDetail,
    PlainUcrl, RegretLedger, UcrlSmdp,
};
use ucrl_smdp::model::{ActionSpec, MdpModel, ModelSpec, Outcome, SimRng, StateSpec};
use ucrl_smdp::options::{compile, OptionSet, OptionSpec};
use ucrl_smdp::planning::{default_tau, gain_oracle, uniformize, value_iteration};

use common::random_smdp;

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn sampled_means_match_expectations() {
    let model = random_smdp(42, 3, 2);
    let mut rng = SimRng::seed_from_u64(1);
    let draws = 100_000;
    for s in 0..3 {
        for a in 0..2 {
            let (mut r, mut t) = (Vec::with_capacity(draws), Vec::with_capacity(draws));
            for _ in 0..draws {
                let step = model.sample_transition(s, a, &mut rng).unwrap();
                r.push(step.reward);
                t.push(step.holding);
            }
            let (rm, rse) = mean_se(&r);
            let (tm, tse) = mean_se(&t);
            assert!((rm - model.r_bar(s, a)).abs() <= 4.0 * rse, "reward ({s},{a})");
            assert!((tm - model.tau_bar(s, a)).abs() <= 4.0 * tse, "holding ({s},{a})");
        }
    }
}

#[test]
fn special_reward_has_the_boosted_mass() {
    let c = LowerBoundConfig { a1_star: 1, ..Default::default() };
    let model = build_lower_bound_smdp(&c).unwrap();
    let high = 0.5 * c.r_max * c.t_max;
    let p = c.tau_bar / c.t_max + c.eta;
    let mut rng = SimRng::seed_from_u64(8);
    let draws = 1_000_000;
    let hits = (0..draws).filter(|_| model.sample_transition(1, 1, &mut rng).unwrap().reward == high).count();
    let sigma = (p * (1.0 - p) / draws as f64).sqrt();
    assert!((hits as f64 / draws as f64 - p).abs() <= 3.0 * sigma);
}

#[test]
fn reset_lands_uniformly() {
    let d = 5;
    let grid = build_grid_mdp(&GridConfig::new(d, 1)).unwrap();
    let target = d * d - 1;
    let mut counts = vec![0u64; target];
    let mut rng = SimRng::seed_from_u64(77);
    let draws = 100_000;
    for _ in 0..draws {
        let step = grid.sample_transition(target, 0, &mut rng).unwrap();
        assert_eq!(step.reward, 1.0);
        counts[step.next] += 1;
    }
    let e = draws as f64 / target as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    // 99th percentile of χ² with 23 degrees of freedom
    assert!(chi2 < 41.638, "χ² = {chi2}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ledger_totals_are_consistent(
        steps in prop::collection::vec((0.1f64..5.0, 0.0f64..3.0), 1..400),
        rho in 0.0f64..2.0,
    ) {
        let mut full = RegretLedger::new(rho, LedgerDetail::Full);
        let mut thin = RegretLedger::new(rho, LedgerDetail::Checkpoints { dense_until: 20, per_decade: 5 });
        for (i, &(tau, r)) in steps.iter().enumerate() {
            full.push(i % 3, i % 2, tau, r).unwrap();
            thin.push(i % 3, i % 2, tau, r).unwrap();
        }
        let recs = full.records();
        prop_assert_eq!(recs.len(), steps.len());
        let (mut t, mut cum) = (0.0, 0.0);
        for (rec, &(tau, r)) in recs.iter().zip(&steps) {
            t += tau;
            cum += r;
            prop_assert!((rec.tn - t).abs() <= 1e-9 * t);
            prop_assert!((rec.cum_reward - cum).abs() <= 1e-9 * cum.max(1.0));
        }
        prop_assert!((full.regret() - (full.duration() * rho - full.total_reward())).abs() < 1e-12);
        let kept = thin.records();
        prop_assert_eq!(kept.last().unwrap().i, steps.len() as u64);
        for rec in kept {
            prop_assert_eq!(rec, recs[rec.i as usize - 1]);
        }
        let mut buf = Vec::new();
        full.write_csv_to(&mut buf).unwrap();
        let rows = read_ledger_from(buf.as_slice()).unwrap();
        for (row, rec) in rows.iter().zip(&recs) {
            prop_assert_eq!(row.tn, rec.tn);
            prop_assert!((row.regret - (rec.tn * rho - rec.cum_reward)).abs() <= 1e-9 * rec.tn.max(1.0));
        }
    }

    #[test]
    fn decomposition_closes_on_option_runs(seed in 0u64..10_000, m in 2usize..4) {
        let cfg = GridConfig::new(5, m);
        let base = build_grid_mdp(&cfg).unwrap();
        let set = build_grid_options(&cfg).unwrap();
        let compiled = compile(&base, &set).unwrap();
        let mut env = LiftedEnv::new(&base, &compiled, &set).unwrap();
        let conf = ConfidencePolicy::for_model(&compiled.model, 0.05).with_scale(0.05);
        let rho = grid_optimal_gain(5, 1.0);
        let out = run(AgentConfig::new(conf, seed), &mut env, Budget::Duration(3000.0), rho, LedgerDetail::Full).unwrap();
        let rho_o = value_iteration(&uniformize(&compiled.model, default_tau(&compiled.model)).unwrap(), 1e-12).unwrap().gain;
        let dec = regret_decomposition(rho, rho_o, &out.ledger, env.primitive_reward()).unwrap();
        prop_assert!(dec.residual().abs() <= 1e-9);
        // these options keep the optimal gain
        prop_assert!(dec.linear_term.abs() <= 1e-9 * out.ledger.duration());
        prop_assert_eq!(env.primitive_steps() as f64, out.ledger.duration());
    }
}

/// Two states; staying in s1 pays 1 per step. The options only allow the
/// round trip s0 → s1 → s0, which pays 1/2 per two steps.
fn round_trip_fixture() -> (MdpModel, OptionSet) {
    let base = MdpModel::new(ModelSpec {
        r_max: 1.0,
        tau_min: 1.0,
        tau_max: 1.0,
        tails: None,
        states: vec![
            StateSpec { actions: vec![ActionSpec::new(vec![Outcome::fixed(1, 1.0, 0.0, 1.0)])] },
            StateSpec {
                actions: vec![
                    ActionSpec::new(vec![Outcome::fixed(1, 1.0, 1.0, 1.0)]),
                    ActionSpec::new(vec![Outcome::fixed(0, 1.0, 0.5, 1.0)]),
                ],
            },
        ],
    })
    .unwrap();
    let set = OptionSet::new(vec![
        OptionSpec { label: "go".into(), initiation: vec![0], termination: vec![(1, 1.0)], policy: vec![(0, 0)] },
        OptionSpec { label: "back".into(), initiation: vec![1], termination: vec![(0, 1.0)], policy: vec![(1, 1)] },
    ]);
    (base, set)
}

#[test]
fn options_that_cut_the_best_route_leave_a_linear_term() {
    let (base, set) = round_trip_fixture();
    let compiled = compile(&base, &set).unwrap();
    let (rho, _) = gain_oracle(&base).unwrap();
    let (rho_o, _) = gain_oracle(&compiled.model).unwrap();
    assert!((rho - 1.0).abs() < 1e-12 && (rho_o - 0.25).abs() < 1e-12);
    let mut env = LiftedEnv::new(&base, &compiled, &set).unwrap();
    let conf = ConfidencePolicy::for_model(&compiled.model, 0.05);
    let out = run(AgentConfig::new(conf, 1), &mut env, Budget::Duration(1000.0), rho, LedgerDetail::Full).unwrap();
    let dec = regret_decomposition(rho, rho_o, &out.ledger, env.primitive_reward()).unwrap();
    let t = out.ledger.duration();
    assert!(dec.linear_term > 0.0);
    assert!((dec.linear_term - t * (rho - rho_o)).abs() < 1e-9);
    assert!(dec.residual().abs() < 1e-9);
    // a single option everywhere: the option-level regret stays bounded
    assert!(dec.smdp_regret.abs() <= 1.0);
}

#[test]
fn coverage_extremes() {
    let model = random_smdp(3, 3, 2);
    let conf = ConfidencePolicy::for_model(&model, 0.05);
    let wide = coverage_test(&model, &AgentConfig::new(conf.with_scale(1e9), 1), 100).unwrap();
    assert_eq!(wide, 0.0);
    let none = coverage_test(&model, &AgentConfig::new(conf.with_scale(0.0), 1), 100).unwrap();
    assert!(none >= 0.95, "rate {none}");
}

#[test]
fn single_action_environment_has_no_regret() {
    let model = random_smdp(11, 3, 1);
    let (rho, _) = gain_oracle(&model).unwrap();
    let regrets: Vec<f64> = (0..200)
        .map(|seed| {
            let conf = ConfidencePolicy::for_model(&model, 0.05);
            let out =
                run(AgentConfig::new(conf, seed), &mut ModelEnv::new(&model), Budget::DecisionSteps(20_000), rho, LedgerDetail::default())
                    .unwrap();
            out.ledger.regret()
        })
        .collect();
    let (m, se) = mean_se(&regrets);
    assert!(m.abs() <= 3.0 * se, "mean {m} se {se}");
}

#[test]
fn episodes_grow_logarithmically() {
    let grid = build_grid_mdp(&GridConfig::new(4, 1)).unwrap().into_smdp();
    let conf = ConfidencePolicy::for_model(&grid, 0.05).with_scale(0.1);
    let mut env = ModelEnv::new(&grid);
    let mut agent = UcrlSmdp::for_env(AgentConfig::new(conf, 5), &env).unwrap();
    let mut ledger = RegretLedger::new(grid_optimal_gain(4, 1.0), LedgerDetail::default());
    let mut counts = Vec::new();
    for n in [10_000u64, 100_000, 1_000_000] {
        agent.run(&mut env, &mut ledger, Budget::DecisionSteps(n), &mut ()).unwrap();
        counts.push(agent.counters().k);
    }
    let sa = grid.num_pairs() as f64;
    for (c, n) in counts.iter().zip([1e4, 1e5, 1e6]) {
        assert!((*c as f64) <= sa * (8.0 * n / sa).log2(), "{c} episodes after {n} steps");
    }
    // each extra decade adds at most a constant number of episodes
    let step1 = counts[1] - counts[0];
    let step2 = counts[2] - counts[1];
    assert!(step2 as f64 <= 1.5 * step1 as f64, "{counts:?}");
}

#[test]
fn plain_learner_is_sublinear_on_the_grid() {
    let d = 3;
    let grid = build_grid_mdp(&GridConfig::new(d, 1)).unwrap().into_smdp();
    let rho = grid_optimal_gain(d, 1.0);
    let ledger = PlainUcrl::new(0.05, 1.0, 2).run(&mut ModelEnv::new(&grid), 1_000_000, rho).unwrap();
    let recs = ledger.records();
    let at = |n: usize| recs[n - 1].tn * rho - recs[n - 1].cum_reward;
    let early = at(100_000) / 1e5;
    let late = at(1_000_000) / 1e6;
    assert!(late < early, "{early} -> {late}");
}

#[test]
fn first_episode_tries_each_pair_at_most_once() {
    let grid = build_grid_mdp(&GridConfig::new(3, 1)).unwrap().into_smdp();
    let conf = ConfidencePolicy::for_model(&grid, 0.05);
    let mut env = ModelEnv::new(&grid);
    let mut agent = UcrlSmdp::for_env(AgentConfig::new(conf, 0), &env).unwrap();
    let mut ledger = RegretLedger::new(0.0, LedgerDetail::Full);
    let ep = agent.run_episode(&mut env, &mut ledger, Budget::DecisionSteps(u64::MAX), &mut ()).unwrap();
    let mut seen = std::collections::HashSet::new();
    for rec in ledger.records() {
        assert!(seen.insert((rec.s, rec.a)), "pair repeated");
    }
    assert!(ep.trigger.is_some());
}
