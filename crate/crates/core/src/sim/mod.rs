//! Round loop, virtual clock, traces and sweeps.
//!
//! Each round charges `1/n` time units, plus `k r` on exchange rounds, where
//! `k` is the largest node degree. Evaluating `F` for the trace is
//! bookkeeping and is never charged.

mod config;
pub mod presets;
mod run;
mod sweep;
mod trace;

pub use config::{
    ConfigErrors, ConfigIssue, SimConfig, DEFAULT_MAX_ITERS, DEFAULT_POINTS_PER_NODE,
};
pub use run::{
    build_graph, build_problem, reference_value, run, run_prepared, run_with, Prepared,
    ReferenceValue, APPROX_REFERENCE_ITERS, ITERATION_CAP,
};
pub use sweep::{
    sweep_n, sweep_n_config, sweep_schedule, SweepAxis, SweepPoint, SweepResult, SWEEP_HEADER,
};
pub use trace::{format_float, read_trace_csv, Hit, RunSummary, Trace, TraceRow, TRACE_HEADER};

use crate::dda::DdaError;
use crate::problems::ProblemError;
use crate::topology::TopologyError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Dda(#[from] DdaError),
    #[error("{0}")]
    Mismatch(String),
    #[error("{0}")]
    Io(String),
    #[error("iterates became non-finite at round {round}; the step size is too large")]
    Diverged { round: u64 },
    #[error("target not reached within {0} iterations")]
    IterationCap(u64),
}

impl SimError {
    /// Configuration problems, as opposed to failures during a run.
    pub fn is_config(&self) -> bool {
        matches!(self, SimError::Config(_) | SimError::Mismatch(_))
    }
}
