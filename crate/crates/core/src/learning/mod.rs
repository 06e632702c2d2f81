//! Optimistic learning in SMDPs, a plain baseline for unit holding times and
//! regret accounting.

mod agent;
mod confidence;
mod counters;
mod coverage;
mod ledger;
mod plain;

pub use agent::{run, AgentConfig, Budget, EpisodeObserver, EpisodeSummary, RunOutput, UcrlSmdp};
pub use confidence::{confidence_radii, ConfidencePolicy, RadiusMode};
pub use counters::Counters;
pub use plain::PlainUcrl;
pub use coverage::{coverage_test, EPISODES_PER_RUN};
pub use ledger::{
    interpolate, read_ledger, read_ledger_from, regret_decomposition, Decomposition, LedgerDetail, LedgerRow, Record,
    RegretLedger, CSV_HEADER, fmt17,
};
