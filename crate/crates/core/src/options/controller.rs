use rand::Rng;

use super::{CompiledSmdp, OptionSet, OptionTables};
use crate::error::{Error, Result};
use crate::model::{MdpModel, StationaryPolicy, Step};

/// Primitive-level controller that executes a stationary policy over options.
#[derive(Debug, Clone)]
pub struct FlatController<'a> {
    compiled: &'a CompiledSmdp,
    tables: OptionTables,
    policy: StationaryPolicy,
    current: Option<usize>,
    decisions: u64,
    steps: u64,
}

/// Turns a policy over the compiled SMDP into a controller over the base MDP.
pub fn lift_policy<'a>(compiled: &'a CompiledSmdp, options: &OptionSet, policy: StationaryPolicy) -> Result<FlatController<'a>> {
    policy.check(&compiled.model)?;
    Ok(FlatController {
        compiled,
        tables: OptionTables::new(options, compiled.index_of.len())?,
        policy,
        current: None,
        decisions: 0,
        steps: 0,
    })
}

impl FlatController<'_> {
    /// Number of options started so far, N(t).
    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    /// Number of primitive steps taken so far, T.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn current_option(&self) -> Option<usize> {
        self.current
    }

    /// Primitive action to play in `state`, starting a new option first if
    /// none is running.
    pub fn action(&mut self, state: usize) -> Result<usize> {
        let option = match self.current {
            Some(o) => o,
            None => {
                let k = self.compiled.index_of.get(state).copied().flatten().ok_or_else(|| {
                    Error::NotAdmissible(format!("decision point at state {state} outside the option state set"))
                })?;
                let o = self.compiled.option(k, self.policy.choice[k]);
                self.current = Some(o);
                self.decisions += 1;
                o
            }
        };
        self.tables.inner_action(option, state)
    }

    /// Records arrival in `next`; returns true when the running option stops.
    pub fn observe<R: Rng + ?Sized>(&mut self, next: usize, rng: &mut R) -> bool {
        self.steps += 1;
        let Some(o) = self.current else {
            return true;
        };
        let stop = self.tables.terminates(o, next, rng);
        if stop {
            self.current = None;
        }
        stop
    }

    /// One primitive step of the base MDP under the controller.
    pub fn step<R: Rng + ?Sized>(&mut self, base: &MdpModel, state: usize, rng: &mut R) -> Result<(Step, bool)> {
        let a = self.action(state)?;
        let step = base.sample_transition(state, a, rng)?;
        let stop = self.observe(step.next, rng);
        Ok((step, stop))
    }
}
