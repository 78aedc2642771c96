//! Experiment harness for the `genlyap` solvers: configuration parsing,
//! the `solve`, `oracle`, `bench-export` and `verify` commands, and the
//! property suite behind `verify`.

pub mod commands;
pub mod config;
pub mod verify;

pub use config::{parse_benchmark, parse_method_list, Experiment, ExperimentConfig, MethodSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("property failure: {0}")]
    Property(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 1 usage, 2 solver or I/O failure, 3 property failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Solver(_) | Self::Io(_) => 2,
            Self::Property(_) => 3,
        }
    }
}

impl From<genlyap::Error> for CliError {
    fn from(e: genlyap::Error) -> Self {
        match e {
            genlyap::Error::Io(io) => Self::Io(io),
            genlyap::Error::Parse { .. } | genlyap::Error::InvalidArgument(_) => Self::Usage(e.to_string()),
            other => Self::Solver(other.to_string()),
        }
    }
}
