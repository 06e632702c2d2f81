//! A small version of the option-length sweep: ratio of the regrets with and
//! without options at matched durations, next to the bound ratio.
//!
//! Usage: `cargo run --release --example reproduce_ratio -- [d] [T_n] [seeds] [jobs]`

use ucrl_smdp::harness::{run_plan, theoretical_ratio, ExperimentPlan};
use ucrl_smdp::learning::Budget;

fn main() -> ucrl_smdp::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let d = args.first().copied().unwrap_or(12.0) as usize;
    let horizon = args.get(1).copied().unwrap_or(1e6);
    let seeds = args.get(2).copied().unwrap_or(2.0) as u64;
    let jobs = args.get(3).copied().unwrap_or(1.0) as usize;
    let plan = ExperimentPlan {
        out_dir: std::env::temp_dir().join("ucrl-smdp-ratio"),
        d: vec![d],
        seeds: (1..=seeds).collect(),
        budget: Budget::Duration(horizon),
        ..Default::default()
    };
    let (result, _) = run_plan(&plan, jobs)?;
    println!("{:>3} {:>10} {:>10} {:>8} {:>8} {:>8}", "m", "opt", "prim", "ratio", "Tn/n", "bound");
    for row in result.final_rows() {
        println!(
            "{:>3} {:>10.1} {:>10.1} {:>8.4} {:>8.4} {:>8.4}",
            row.m,
            row.regret_opt_mean,
            row.regret_prim_mean,
            row.ratio,
            row.tn_over_n,
            theoretical_ratio(d, row.m, 1.0 / row.tn_over_n)
        );
    }
    println!("written to {}", plan.out_dir.display());
    Ok(())
}
