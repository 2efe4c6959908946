//! Simulation and analysis toolkit for distributed dual averaging (DDA).
//!
//! The crate is organised bottom-up:
//!
//! * [`topology`] builds communication graphs, Metropolis consensus matrices
//!   and their spectral quantities.
//! * [`problems`] supplies the per-node convex objectives (max-of-quadratics
//!   and metric learning) together with reference solvers.
//! * [`dda`] is the node state machine: consensus and local updates, the
//!   proximal step, running averages, communication schedules and the
//!   closed-form accumulator expansion used as a test oracle.
//! * [`cost`] holds the virtual-time cost model and the closed-form
//!   tradeoff quantities (`n_opt`, `h_opt`, the rate constants).
//! * [`sim`] drives complete runs and sweeps and writes CSV traces.
//!
//! Per-node work inside a round goes through [`exec`], which uses rayon when
//! the `parallel` feature is enabled and a plain loop otherwise. Both paths
//! produce bit-identical results.

pub mod cost;
pub mod dda;
pub mod exec;
pub mod linalg;
pub mod problems;
pub mod sim;
pub mod topology;

pub use cost::{CostBreakdown, CostError, TradeoffParams};
pub use dda::{NodeState, Schedule, StepSize};
pub use exec::Exec;
pub use problems::{Objective, Problem, ProblemKind};
pub use sim::{SimConfig, SimError, Trace, TraceRow};
pub use topology::{ConsensusMatrix, Graph, GraphKind, SpectralInfo};

/// Crate version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
