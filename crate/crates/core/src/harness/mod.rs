//! Experiment drivers behind the command line: compile, run, baseline,
//! sweep and verify, with deterministic JSON/CSV output.

mod config;
mod pipeline;
mod sweep;
mod verify;

use thiserror::Error;

pub use config::{
    unlimited_time, BenchmarkSpec, Overrides, RunConfig, SweepMetric, SweepSpec, VirtualSection,
    DEFAULT_RUN_TRIALS, DEFAULT_SWEEP_TRIALS, SWEEP_PARAMETERS,
};
pub use pipeline::{
    cmd_baseline, cmd_compile, cmd_run, compile, run_trials, with_threads, Compiled, RunSummary, Stats, TrialRecord,
};
pub use sweep::{cmd_sweep, sweep_csv, SweepRow, CSV_HEADER, CSV_SCHEMA};
pub use verify::{cmd_verify, verify_with, SuiteResult, VerifyOptions, VerifySummary};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("mapper failure: {0}")]
    Mapper(#[from] crate::mapper::MapError),
    #[error("runtime abort: {0}")]
    Runtime(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) => 2,
            HarnessError::Mapper(_) => 3,
            HarnessError::Runtime(_) => 4,
            HarnessError::Verification(_) => 5,
        }
    }
}

impl From<crate::online::OnlineError> for HarnessError {
    /// Every engine error is a configuration the engine cannot run.
    fn from(e: crate::online::OnlineError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(HarnessError::Config("x".into()).exit_code(), 2);
        assert_eq!(HarnessError::Mapper(crate::mapper::MapError::Deadlock { layer: 0 }).exit_code(), 3);
        assert_eq!(HarnessError::Runtime("x".into()).exit_code(), 4);
        assert_eq!(HarnessError::Verification("x".into()).exit_code(), 5);
    }
}
