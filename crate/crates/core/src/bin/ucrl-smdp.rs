use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ucrl_smdp::env::{build_environment, EnvParams};
use ucrl_smdp::harness::{run_plan, ExperimentPlan};
use ucrl_smdp::learning::{run, AgentConfig, Budget, ConfidencePolicy, LedgerDetail};
use ucrl_smdp::model::{read_model, write_model, MdpModel, SmdpModel};
use ucrl_smdp::options::{compile, OptionSet};
use ucrl_smdp::planning::{default_tau, diameter, uniformize, value_iteration};
use ucrl_smdp::{Error, Result};

#[derive(Parser)]
#[command(name = "ucrl-smdp", version, about = "Planning and optimistic learning in SMDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    SubExp,
    Bounded,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal gain and policy of a model file.
    Plan {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        epsilon: f64,
        /// Aperiodicity parameter; 0.9·τ_min by default.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Diameter of a model file.
    Diameter {
        #[arg(long)]
        model: PathBuf,
    },
    /// Runs the learner and writes its regret ledger.
    Learn {
        #[arg(long, conflicts_with = "env", required_unless_present = "env")]
        model: Option<PathBuf>,
        #[arg(long)]
        env: Option<String>,
        /// Environment parameter as key=value; repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        /// Option set over the MDP given by --model.
        #[arg(long, requires = "model")]
        options: Option<PathBuf>,
        /// Number of decisions.
        #[arg(long, conflicts_with = "duration", required_unless_present = "duration")]
        steps: Option<u64>,
        /// Elapsed time to reach instead of a number of decisions.
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Multiplier on every confidence radius.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Optimal gain to measure regret against; computed when absent.
        #[arg(long)]
        rho: Option<f64>,
        /// Keep only log-spaced ledger rows.
        #[arg(long)]
        thin: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs an experiment plan.
    Experiment {
        #[arg(long, required_unless_present = "print_default")]
        plan: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory, overriding the plan's.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the default plan and exit.
        #[arg(long)]
        print_default: bool,
    },
    /// Writes a registered environment in the model file format.
    Export {
        #[arg(long)]
        env: String,
        #[arg(long = "param")]
        params: Vec<String>,
        /// Decision-level model.
        #[arg(long)]
        out: PathBuf,
        /// Primitive MDP and option set, for option environments.
        #[arg(long)]
        base_out: Option<PathBuf>,
        #[arg(long)]
        options_out: Option<PathBuf>,
    },
}

fn optimal_gain(model: &SmdpModel) -> Result<f64> {
    Ok(value_iteration(&uniformize(model, default_tau(model))?, 1e-10)?.gain)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Plan { model, epsilon, tau } => {
            let model = read_model(model)?;
            let tau = tau.unwrap_or_else(|| default_tau(&model));
            let sol = value_iteration(&uniformize(&model, tau)?, epsilon)?;
            println!("gain {}", sol.gain);
            println!("iterations {}", sol.iterations);
            let policy: Vec<String> = sol.policy.choice.iter().map(ToString::to_string).collect();
            println!("policy {}", policy.join(" "));
        }
        Command::Diameter { model } => {
            println!("{}", diameter(&read_model(model)?)?);
        }
        Command::Learn { model, env, params, options, steps, duration, delta, seed, mode, scale, rho, thin, out } => {
            let budget = match (steps, duration) {
                (Some(n), _) => Budget::DecisionSteps(n),
                (None, Some(t)) => Budget::Duration(t),
                (None, None) => return Err(Error::Parameters("give --steps or --duration".into())),
            };
            let built = match (&model, &env) {
                (Some(path), _) => {
                    let base = read_model(path)?;
                    match &options {
                        Some(opts) => {
                            let base = MdpModel::from_smdp(base)?;
                            let set = OptionSet::read(opts)?;
                            let compiled = compile(&base, &set)?;
                            let rho_base = optimal_gain(base.smdp())?;
                            ucrl_smdp::env::BuiltEnvironment {
                                name: path.display().to_string(),
                                model: compiled.model.clone(),
                                base: Some(base),
                                options: Some(set),
                                compiled: Some(compiled),
                                optimal_gain: rho_base,
                            }
                        }
                        None => {
                            let rho_model = optimal_gain(&base)?;
                            ucrl_smdp::env::BuiltEnvironment {
                                name: path.display().to_string(),
                                model: base,
                                base: None,
                                options: None,
                                compiled: None,
                                optimal_gain: rho_model,
                            }
                        }
                    }
                }
                (None, Some(name)) => build_environment(name, &EnvParams::default().with_overrides(&params)?)?,
                (None, None) => return Err(Error::Parameters("give --model or --env".into())),
            };
            let confidence = match mode {
                Some(Mode::Bounded) => ConfidencePolicy::bounded_for_model(&built.model, delta),
                Some(Mode::SubExp) => {
                    let pol = ConfidencePolicy::for_model(&built.model, delta);
                    if !matches!(pol.mode, ucrl_smdp::learning::RadiusMode::SubExponential { .. }) {
                        return Err(Error::Parameters("model declares no sub-exponential constants".into()));
                    }
                    pol
                }
                None => ConfidencePolicy::for_model(&built.model, delta),
            }
            .with_scale(scale);
            let detail = if thin { LedgerDetail::default() } else { LedgerDetail::Full };
            let mut sim = built.simulator()?;
            let output = run(AgentConfig::new(confidence, seed), &mut sim, budget, rho.unwrap_or(built.optimal_gain), detail)?;
            output.ledger.write_csv(&out)?;
            println!(
                "n {} Tn {} regret {} episodes {}",
                output.ledger.steps(),
                output.ledger.duration(),
                output.ledger.regret(),
                output.episodes.len()
            );
        }
        Command::Experiment { plan, jobs, out, print_default } => {
            if print_default {
                print!("{}", ExperimentPlan::default().to_toml_string()?);
                return Ok(());
            }
            let path = plan.ok_or_else(|| Error::Parameters("give --plan".into()))?;
            let mut plan = ExperimentPlan::read(path)?;
            if let Some(dir) = out {
                plan.out_dir = dir;
            }
            let (result, _) = run_plan(&plan, jobs)?;
            for row in result.final_rows() {
                println!(
                    "d {:>3} m {:>2}  Tn {:>12.0}  regret opt {:>10.1}  prim {:>10.1}  ratio {:.4}  Tn/n {:.4}",
                    row.d, row.m, row.tn, row.regret_opt_mean, row.regret_prim_mean, row.ratio, row.tn_over_n
                );
            }
        }
        Command::Export { env, params, out, base_out, options_out } => {
            let built = build_environment(&env, &EnvParams::default().with_overrides(&params)?)?;
            write_model(&out, &built.model)?;
            if let (Some(path), Some(base)) = (base_out, &built.base) {
                write_model(path, base.smdp())?;
            }
            if let (Some(path), Some(set)) = (options_out, &built.options) {
                set.write(path)?;
            }
        }
    }
    Ok(())
}
