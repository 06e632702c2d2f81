//! The two-state hard instances: planner output against the closed forms.
//!
//! Usage: `cargo run --release --example lower_bound`

use ucrl_smdp::env::{
    build_lower_bound_smdp, lower_bound_diameter, lower_bound_optimal_gain, Layout, LowerBoundConfig, LowerBoundVariant,
};
use ucrl_smdp::planning::{default_tau, diameter, uniformize, value_iteration};

fn main() -> ucrl_smdp::Result<()> {
    for variant in [LowerBoundVariant::GeneralSmdp, LowerBoundVariant::OptionsCompatible] {
        let cfg = LowerBoundConfig { variant, actions: 3, a0_star: 2, a1_star: 1, ..Default::default() };
        let model = build_lower_bound_smdp(&cfg)?;
        let sol = value_iteration(&uniformize(&model, default_tau(&model))?, 1e-12)?;
        println!("{variant:?}");
        println!("  gain     planner {:.12}  closed form {:.12}", sol.gain, lower_bound_optimal_gain(&cfg));
        println!("  policy   {:?} (expected [{}, {}])", sol.policy.choice, cfg.a0_star, cfg.a1_star);
        let eta0 = LowerBoundConfig { epsilon: 0.0, eta: 0.0, ..cfg };
        let flat = build_lower_bound_smdp(&eta0)?;
        println!("  diameter planner {:.9}  closed form {:.9}", diameter(&flat)?, lower_bound_diameter(&eta0));
    }
    let tree = LowerBoundConfig { layout: Layout::Tree, copies: 7, actions: 2, good_copy: 5, ..Default::default() };
    let model = build_lower_bound_smdp(&tree)?;
    let sol = value_iteration(&uniformize(&model, default_tau(&model))?, 1e-12)?;
    println!("tree of {} copies: {} states, gain {:.12}, diameter {:.6}", tree.copies, model.num_states(), sol.gain, diameter(&model)?);
    Ok(())
}
