//! Runs the learner over options and splits its regret into the SMDP regret
//! and the gap between the optimal gains with and without options.
//!
//! Usage: `cargo run --release --example regret_decomposition`

use ucrl_smdp::env::{build_grid_mdp, grid_optimal_gain, GridConfig, LiftedEnv};
use ucrl_smdp::learning::{regret_decomposition, AgentConfig, Budget, ConfidencePolicy, LedgerDetail, RegretLedger, UcrlSmdp};
use ucrl_smdp::options::{compile, OptionSet, OptionSpec};
use ucrl_smdp::planning::{default_tau, uniformize, value_iteration};

fn main() -> ucrl_smdp::Result<()> {
    let cfg = GridConfig::new(6, 1);
    let grid = build_grid_mdp(&cfg)?;
    let target = cfg.target();
    let d = cfg.d;
    // primitives, except that the two moves into the target are replaced by
    // three-step detours, so every route to the target gets two steps longer
    let (west, north) = (target - 1, target - d);
    let mut options = Vec::new();
    for s in 0..target {
        for dir in 0..4 {
            let (termination, policy) = if s == west && dir == 1 {
                (vec![(west - d, 0.0), (north, 0.0), (target, 1.0)], vec![(west, 2), (west - d, 1), (north, 3)])
            } else if s == north && dir == 3 {
                (vec![(north - 1, 0.0), (west, 0.0), (target, 1.0)], vec![(north, 0), (north - 1, 3), (west, 1)])
            } else {
                let next = grid.row(s, dir)[0].0;
                (vec![(next, 1.0)], vec![(s, dir)])
            };
            options.push(OptionSpec { label: format!("{s}/{dir}"), initiation: vec![s], termination, policy });
        }
    }
    options.push(OptionSpec {
        label: "reset".into(),
        initiation: vec![target],
        termination: (0..target).map(|s| (s, 1.0)).collect(),
        policy: vec![(target, 0)],
    });
    let set = OptionSet::new(options);
    let compiled = compile(&grid, &set)?;
    let rho_base = grid_optimal_gain(cfg.d, cfg.r_max);
    let rho_options = value_iteration(&uniformize(&compiled.model, default_tau(&compiled.model))?, 1e-12)?.gain;

    let mut env = LiftedEnv::new(&grid, &compiled, &set)?;
    let confidence = ConfidencePolicy::for_model(&compiled.model, 0.05).with_scale(0.05);
    let mut agent = UcrlSmdp::for_env(AgentConfig::new(confidence, 7), &env)?;
    let mut ledger = RegretLedger::new(rho_base, LedgerDetail::default());
    agent.run(&mut env, &mut ledger, Budget::Duration(2e5), &mut ())?;

    let dec = regret_decomposition(rho_base, rho_options, &ledger, env.primitive_reward())?;
    println!("rho*(M) = {rho_base:.9}  rho*(M_O) = {rho_options:.9}");
    println!("n = {}  T_n = {}", ledger.steps(), ledger.duration());
    println!("regret on M          {:>14.6}", dec.total);
    println!("regret on M_O        {:>14.6}", dec.smdp_regret);
    println!("T_n (rho - rho_O)    {:>14.6}", dec.linear_term);
    println!("residual             {:>14.3e}", dec.residual());
    Ok(())
}
