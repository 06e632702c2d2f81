//! Simulators for the learner and the concrete experiment environments.

mod grid;
mod lower_bound;
mod registry;

pub use grid::{build_grid_deterministic_options, build_grid_mdp, build_grid_options, grid_optimal_gain, GridConfig, OptionMode};
pub use lower_bound::{
    build_lower_bound_smdp, lower_bound_diameter, lower_bound_optimal_gain, Layout, LowerBoundConfig, LowerBoundVariant,
};
pub use registry::{build_environment, BuiltEnvironment, EnvParams, Simulator, ENVIRONMENT_NAMES};

use crate::error::{Error, Result};
use crate::model::{MdpModel, SimRng, SmdpModel, Step};
use crate::options::{CompiledSmdp, OptionSet, OptionTables};

/// Decision-level interface seen by the learner.
pub trait Environment {
    fn num_states(&self) -> usize;
    fn num_actions(&self, state: usize) -> usize;
    /// Executes `action` in `state` and reports the successor, the reward and
    /// the holding time.
    fn step(&mut self, state: usize, action: usize, rng: &mut SimRng) -> Result<Step>;
}

/// Samples directly from an SMDP model.
#[derive(Debug, Clone)]
pub struct ModelEnv<'a> {
    model: &'a SmdpModel,
}

impl<'a> ModelEnv<'a> {
    pub fn new(model: &'a SmdpModel) -> Self {
        ModelEnv { model }
    }
}

impl Environment for ModelEnv<'_> {
    fn num_states(&self) -> usize {
        self.model.num_states()
    }

    fn num_actions(&self, state: usize) -> usize {
        self.model.num_actions(state)
    }

    fn step(&mut self, state: usize, action: usize, rng: &mut SimRng) -> Result<Step> {
        self.model.sample_transition(state, action, rng)
    }
}

/// Executes options step by step on the base MDP. States and actions are
/// those of the compiled SMDP; holding times count primitive steps.
#[derive(Debug, Clone)]
pub struct LiftedEnv<'a> {
    base: &'a MdpModel,
    compiled: &'a CompiledSmdp,
    tables: OptionTables,
    primitive_reward: f64,
    primitive_steps: u64,
}

impl<'a> LiftedEnv<'a> {
    pub fn new(base: &'a MdpModel, compiled: &'a CompiledSmdp, options: &OptionSet) -> Result<Self> {
        Ok(LiftedEnv {
            base,
            compiled,
            tables: OptionTables::new(options, base.num_states())?,
            primitive_reward: 0.0,
            primitive_steps: 0,
        })
    }

    /// Sum of all primitive rewards collected so far.
    pub fn primitive_reward(&self) -> f64 {
        self.primitive_reward
    }

    pub fn primitive_steps(&self) -> u64 {
        self.primitive_steps
    }
}

impl Environment for LiftedEnv<'_> {
    fn num_states(&self) -> usize {
        self.compiled.model.num_states()
    }

    fn num_actions(&self, state: usize) -> usize {
        self.compiled.model.num_actions(state)
    }

    fn step(&mut self, state: usize, action: usize, rng: &mut SimRng) -> Result<Step> {
        if state >= self.num_states() {
            return Err(Error::StateOutOfRange(state));
        }
        if action >= self.num_actions(state) {
            return Err(Error::ActionOutOfRange { state, action });
        }
        let option = self.compiled.option(state, action);
        let mut x = self.compiled.states[state];
        let mut reward = 0.0;
        let mut steps = 0u64;
        loop {
            let a = self.tables.inner_action(option, x)?;
            let st = self.base.sample_unchecked(x, a, rng);
            reward += st.reward;
            self.primitive_reward += st.reward;
            steps += 1;
            x = st.next;
            if self.tables.terminates(option, x, rng) {
                break;
            }
        }
        self.primitive_steps += steps;
        let next = self.compiled.index_of[x].ok_or(Error::LeavesOptionStates { option, state: x })?;
        Ok(Step { next, reward, holding: steps as f64 })
    }
}
