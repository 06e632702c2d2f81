//! Learns on the grid, with primitive actions and with options, and writes
//! both regret ledgers.
//!
//! Usage: `cargo run --release --example learn_grid -- [d] [m] [T_n] [radius scale]`

use std::time::Instant;

use ucrl_smdp::env::{build_environment, EnvParams};
use ucrl_smdp::learning::{run, AgentConfig, Budget, ConfidencePolicy, LedgerDetail};

fn main() -> ucrl_smdp::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let d = args.first().copied().unwrap_or(10.0) as usize;
    let m = args.get(1).copied().unwrap_or(3.0) as usize;
    let horizon = args.get(2).copied().unwrap_or(1e6);
    let scale = args.get(3).copied().unwrap_or(0.01);
    let params = EnvParams { d, m, ..Default::default() };
    let dir = std::env::temp_dir();
    for name in ["grid", "grid-options"] {
        let env = build_environment(name, &params)?;
        let confidence = ConfidencePolicy::for_model(&env.model, 0.05).with_scale(scale);
        let mut sim = env.simulator()?;
        let start = Instant::now();
        let out = run(AgentConfig::new(confidence, 1), &mut sim, Budget::Duration(horizon), env.optimal_gain, LedgerDetail::default())?;
        let path = dir.join(format!("{name}_d{d}_m{m}.csv"));
        out.ledger.write_csv(&path)?;
        println!(
            "{name:>13}: n = {:>9}  T_n = {:>9}  regret = {:>10.1}  regret/T_n = {:.5}  episodes = {:>5}  ({:.1?})  -> {}",
            out.ledger.steps(),
            out.ledger.duration(),
            out.ledger.regret(),
            out.ledger.regret() / out.ledger.duration(),
            out.episodes.len(),
            start.elapsed(),
            path.display()
        );
    }
    Ok(())
}
