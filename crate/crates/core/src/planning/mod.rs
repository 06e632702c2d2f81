//! Average-reward planning for SMDPs.

mod diameter;
mod evi;
mod oracle;
mod uniformize;
mod value_iteration;

pub use diameter::{diameter, diameter_uniformized, equivalent_diameter_check, hitting_times};
pub use evi::{
    extended_value_iteration, extended_value_iteration_with, optimistic_holding, optimistic_transition,
    optimistic_value, value_order, BoundedParameterSmdp, EviOptions,
};
pub use oracle::{gain_oracle, policy_gain, policy_gain_uniformized, recurrent_classes};
pub use uniformize::{default_tau, uniformize, UniformizedMdp};
pub use value_iteration::{value_iteration, value_iteration_capped, EviSolution, OptimisticModel, MAX_SWEEPS};
