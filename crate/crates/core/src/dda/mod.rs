//! Distributed dual averaging: per-node updates, step sizes and schedules.
//!
//! One round `t >= 1` at node `i`:
//!
//! ```text
//! g_i   = subgradient of f_i at x_i(t-1)
//! z_i   = sum_j P_ij z_j(t-1) + g_i      (exchange round)
//!       = z_i(t-1) + g_i                 (cheap round)
//! x_i   = project(-a(t) z_i)             (psi = |x|^2 / 2)
//! xhat  = ((t-1) xhat + x_i) / t
//! ```

mod closed_form;
mod schedule;
mod step;
mod update;

pub use closed_form::{closed_form_z, GradientHistory};
pub use schedule::{CommRounds, Schedule};
pub use step::{optimal_step_a, StepSize};
pub use update::{
    consensus_update, local_update, network_error, proximal_step, running_average, NetworkError,
    NodeState,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DdaError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("gradient history holds {have} rounds, need {need}")]
    HistoryIncomplete { have: usize, need: usize },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid step size: {0}")]
    InvalidStep(String),
}
