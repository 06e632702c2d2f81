//! Plans on a model file, or on the two-state hard instance when no file is
//! given, and prints the gain, the policy and the diameter.
//!
//! Usage: `cargo run --release --example plan_model -- [model.toml]`

use ucrl_smdp::env::{build_environment, EnvParams};
use ucrl_smdp::model::read_model;
use ucrl_smdp::planning::{default_tau, diameter, gain_oracle, uniformize, value_iteration};

fn main() -> ucrl_smdp::Result<()> {
    let model = match std::env::args().nth(1) {
        Some(path) => read_model(path)?,
        None => build_environment("lb-smdp", &EnvParams::default())?.model,
    };
    let tau = default_tau(&model);
    let sol = value_iteration(&uniformize(&model, tau)?, 1e-10)?;
    println!("states {}  pairs {}  tau {tau}", model.num_states(), model.num_pairs());
    println!("gain {:.12} after {} sweeps", sol.gain, sol.iterations);
    println!("policy {:?}", sol.policy.choice);
    if model.num_pairs() <= 16 {
        let (best, policy) = gain_oracle(&model)?;
        println!("oracle gain {best:.12} with policy {:?}", policy.choice);
    }
    println!("diameter {:.9}", diameter(&model)?);
    Ok(())
}
