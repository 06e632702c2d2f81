//! Compiles the grid options into an SMDP and compares it with the grid.
//!
//! Usage: `cargo run --release --example compile_options -- [d] [m]`

use ucrl_smdp::env::{build_grid_deterministic_options, build_grid_mdp, build_grid_options, GridConfig};
use ucrl_smdp::options::compile;
use ucrl_smdp::planning::{default_tau, diameter, uniformize, value_iteration};

fn main() -> ucrl_smdp::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let d = args.next().unwrap_or(10);
    let m = args.next().unwrap_or(3);
    let cfg = GridConfig::new(d, m);
    let grid = build_grid_mdp(&cfg)?;
    let gain = |model: &ucrl_smdp::model::SmdpModel| -> ucrl_smdp::Result<f64> {
        Ok(value_iteration(&uniformize(model, default_tau(model))?, 1e-10)?.gain)
    };
    println!("grid       D = {:>8.3}  gain = {:.9}", diameter(&grid)?, gain(&grid)?);
    for (name, set) in [("options", build_grid_options(&cfg)?), ("fixed-len", build_grid_deterministic_options(&cfg)?)] {
        let compiled = compile(&grid, &set)?;
        let model = &compiled.model;
        println!(
            "{name:<10} D = {:>8.3}  gain = {:.9}  tau in [{}, {}]",
            diameter(model)?,
            gain(model)?,
            model.tau_min(),
            model.tau_max()
        );
    }
    let centre = (d / 2) * d + d / 2;
    let compiled = compile(&grid, &build_grid_options(&cfg)?)?;
    let k = compiled.index_of[centre].expect("every cell starts options");
    for (a, label) in ["left", "right", "up", "down"].iter().enumerate() {
        println!("from the centre, {label}: E[tau] = {:.4}, successors {:?}", compiled.model.tau_bar(k, a), compiled.model.row(k, a));
    }
    Ok(())
}
