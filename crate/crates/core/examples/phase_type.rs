//! Duration laws of single options as absorbing chains.
//!
//! Usage: `cargo run --release --example phase_type`

use ucrl_smdp::env::{build_grid_mdp, build_grid_options, GridConfig};
use ucrl_smdp::model::{ActionSpec, MdpModel, ModelSpec, Outcome, StateSpec};
use ucrl_smdp::options::{analyze_holding, OptionSpec};

fn main() -> ucrl_smdp::Result<()> {
    let cfg = GridConfig::new(10, 4);
    let grid = build_grid_mdp(&cfg)?;
    let set = build_grid_options(&cfg)?;
    // (5, 5) moving left, then (2, 2) moving left with the wall two cells away
    for start in [55, 22] {
        let option = &set.options[4 * start];
        let ph = analyze_holding(&grid, option, start)?;
        println!("{}: pmf {:?}  E[tau] = {}  {:?}", option.label, ph.pmf, ph.mean_holding, ph.classification);
    }

    // a self-loop that may repeat: unbounded, geometric tail
    let stay = |p: f64| {
        ActionSpec::new(vec![Outcome::fixed(0, p, 0.0, 1.0), Outcome::fixed(1, 1.0 - p, 1.0, 1.0)])
    };
    let back = ActionSpec::new(vec![Outcome::fixed(0, 1.0, 0.0, 1.0)]);
    let base = MdpModel::new(ModelSpec {
        r_max: 1.0,
        tau_min: 1.0,
        tau_max: 1.0,
        tails: None,
        states: vec![StateSpec { actions: vec![stay(0.5)] }, StateSpec { actions: vec![back] }],
    })?;
    let option = OptionSpec {
        label: "wait".into(),
        initiation: vec![0],
        termination: vec![(0, 0.0), (1, 1.0)],
        policy: vec![(0, 0)],
    };
    let ph = analyze_holding(&base, &option, 0)?;
    println!(
        "wait: spectral radius {}  {:?}  E[tau] = {}  first terms {:?}  tail {:e}",
        ph.spectral_radius,
        ph.classification,
        ph.mean_holding,
        &ph.pmf[..4],
        ph.tail_mass
    );
    Ok(())
}
