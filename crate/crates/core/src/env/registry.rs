//! Named environments with their decision-level model and simulator.

use serde::{Deserialize, Serialize};

use super::{
    build_grid_deterministic_options, build_grid_mdp, build_grid_options, build_lower_bound_smdp, grid_optimal_gain,
    lower_bound_optimal_gain, Environment, GridConfig, Layout, LiftedEnv, LowerBoundConfig, LowerBoundVariant, ModelEnv,
    OptionMode,
};
use crate::error::{Error, Result};
use crate::model::{MdpModel, SmdpModel};
use crate::options::{compile, CompiledSmdp, OptionSet};

pub const ENVIRONMENT_NAMES: [&str; 5] = ["grid", "grid-options", "grid-det-options", "lb-smdp", "lb-options"];

/// Parameters shared by all registered environments. Grid environments read
/// `d`, `m` and `r_max`; the two-state families read the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvParams {
    pub d: usize,
    pub m: usize,
    pub r_max: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub p: f64,
    pub eta: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub tau_bar: f64,
    pub copies: usize,
    pub actions: usize,
    pub a0_star: usize,
    pub a1_star: usize,
    pub good_copy: usize,
    pub layout: Layout,
}

impl Default for EnvParams {
    fn default() -> Self {
        let lb = LowerBoundConfig::default();
        EnvParams {
            d: 20,
            m: 3,
            r_max: 1.0,
            delta: lb.delta,
            epsilon: lb.epsilon,
            p: lb.p,
            eta: lb.eta,
            t_min: lb.t_min,
            t_max: lb.t_max,
            tau_bar: lb.tau_bar,
            copies: lb.copies,
            actions: lb.actions,
            a0_star: lb.a0_star,
            a1_star: lb.a1_star,
            good_copy: lb.good_copy,
            layout: lb.layout,
        }
    }
}

impl EnvParams {
    /// Applies `key=value` overrides, values written as TOML literals.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut table = toml::Table::try_from(self).map_err(|e| Error::Parse(e.to_string()))?;
        for item in overrides {
            let item = item.as_ref();
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{item}`")))?;
            let doc: toml::Table = format!("v = {}", value.trim())
                .parse()
                .or_else(|_| format!("v = \"{}\"", value.trim()).parse())
                .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
            table.insert(key.trim().to_string(), doc["v"].clone());
        }
        table.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))
    }

    pub fn grid(&self, option_mode: OptionMode) -> GridConfig {
        GridConfig { d: self.d, m: self.m, r_max: self.r_max, option_mode }
    }

    pub fn lower_bound(&self, variant: LowerBoundVariant) -> LowerBoundConfig {
        LowerBoundConfig {
            variant,
            layout: self.layout,
            delta: self.delta,
            epsilon: self.epsilon,
            p: self.p,
            eta: self.eta,
            t_min: self.t_min,
            t_max: self.t_max,
            tau_bar: self.tau_bar,
            r_max: self.r_max,
            copies: self.copies,
            actions: self.actions,
            a0_star: self.a0_star,
            a1_star: self.a1_star,
            good_copy: self.good_copy,
        }
    }
}

/// An environment ready for learning: the model the agent faces, the
/// primitive MDP and options when decisions are options, and the optimal
/// gain of the underlying problem.
#[derive(Debug, Clone)]
pub struct BuiltEnvironment {
    pub name: String,
    pub model: SmdpModel,
    pub base: Option<MdpModel>,
    pub options: Option<OptionSet>,
    pub compiled: Option<CompiledSmdp>,
    /// Optimal gain of the primitive problem, from its closed form.
    pub optimal_gain: f64,
}

impl BuiltEnvironment {
    pub fn is_lifted(&self) -> bool {
        self.compiled.is_some()
    }

    /// Fresh simulator over `model`'s states and actions.
    pub fn simulator(&self) -> Result<Simulator<'_>> {
        match (&self.base, &self.compiled, &self.options) {
            (Some(base), Some(compiled), Some(options)) => Ok(Simulator::Lifted(LiftedEnv::new(base, compiled, options)?)),
            _ => Ok(Simulator::Model(ModelEnv::new(&self.model))),
        }
    }
}

/// Either a direct model sampler or an option executor.
#[derive(Debug, Clone)]
pub enum Simulator<'a> {
    Model(ModelEnv<'a>),
    Lifted(LiftedEnv<'a>),
}

impl Simulator<'_> {
    /// Total primitive reward, when the simulator runs options.
    pub fn primitive_reward(&self) -> Option<f64> {
        match self {
            Simulator::Lifted(env) => Some(env.primitive_reward()),
            Simulator::Model(_) => None,
        }
    }
}

impl Environment for Simulator<'_> {
    fn num_states(&self) -> usize {
        match self {
            Simulator::Model(e) => e.num_states(),
            Simulator::Lifted(e) => e.num_states(),
        }
    }

    fn num_actions(&self, state: usize) -> usize {
        match self {
            Simulator::Model(e) => e.num_actions(state),
            Simulator::Lifted(e) => e.num_actions(state),
        }
    }

    fn step(&mut self, state: usize, action: usize, rng: &mut crate::model::SimRng) -> Result<crate::model::Step> {
        match self {
            Simulator::Model(e) => e.step(state, action, rng),
            Simulator::Lifted(e) => e.step(state, action, rng),
        }
    }
}

pub fn build_environment(name: &str, params: &EnvParams) -> Result<BuiltEnvironment> {
    let lifted = |mode: OptionMode| -> Result<BuiltEnvironment> {
        let cfg = params.grid(mode);
        let base = build_grid_mdp(&cfg)?;
        let options = match mode {
            OptionMode::Deterministic => build_grid_deterministic_options(&cfg)?,
            _ => build_grid_options(&cfg)?,
        };
        let compiled = compile(&base, &options)?;
        Ok(BuiltEnvironment {
            name: name.to_string(),
            model: compiled.model.clone(),
            base: Some(base),
            options: Some(options),
            compiled: Some(compiled),
            optimal_gain: grid_optimal_gain(cfg.d, cfg.r_max),
        })
    };
    match name {
        "grid" => {
            let cfg = params.grid(OptionMode::PrimitiveOnly);
            let base = build_grid_mdp(&cfg)?;
            Ok(BuiltEnvironment {
                name: name.to_string(),
                model: base.smdp().clone(),
                base: Some(base),
                options: None,
                compiled: None,
                optimal_gain: grid_optimal_gain(cfg.d, cfg.r_max),
            })
        }
        "grid-options" => lifted(OptionMode::Interruptible),
        "grid-det-options" => lifted(OptionMode::Deterministic),
        "lb-smdp" | "lb-options" => {
            let variant =
                if name == "lb-smdp" { LowerBoundVariant::GeneralSmdp } else { LowerBoundVariant::OptionsCompatible };
            let cfg = params.lower_bound(variant);
            Ok(BuiltEnvironment {
                name: name.to_string(),
                model: build_lower_bound_smdp(&cfg)?,
                base: None,
                options: None,
                compiled: None,
                optimal_gain: lower_bound_optimal_gain(&cfg),
            })
        }
        other => Err(Error::UnknownEnvironment(other.to_string())),
    }
}
