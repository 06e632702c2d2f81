use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    Validation(String),
    #[error("action {action} out of range in state {state}")]
    ActionOutOfRange { state: usize, action: usize },
    #[error("state {0} out of range")]
    StateOutOfRange(usize),
    #[error("tau parameter {tau} must lie in (0, {tau_min})")]
    TauParam { tau: f64, tau_min: f64 },
    #[error("iteration cap of {0} sweeps exceeded")]
    IterationCap(u64),
    #[error("empty holding-time interval at ({state}, {action})")]
    EmptyInterval { state: usize, action: usize },
    #[error("model is not communicating: {0}")]
    NotCommunicating(String),
    #[error("option set is not admissible: {0}")]
    NotAdmissible(String),
    #[error("option {option} does not terminate almost surely (spectral radius {radius})")]
    NonTerminating { option: usize, radius: f64 },
    #[error("option {option} leaves the option state set at state {state}")]
    LeavesOptionStates { option: usize, state: usize },
    #[error("option {option} has no inner action at state {state}")]
    UndefinedInnerPolicy { option: usize, state: usize },
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("run aborted: {0}")]
    RunAbort(String),
    #[error("unknown environment '{0}'")]
    UnknownEnvironment(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::IterationCap(_) | Error::RunAbort(_) | Error::EmptyInterval { .. } => 3,
            _ => 2,
        }
    }
}
