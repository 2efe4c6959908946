//! Convex objectives split across nodes.
//!
//! Every problem is a global average of per-point losses,
//! `F(x) = (1/m) sum_j l_j(x) = (1/n) sum_i f_i(x)`, with node `i` owning a
//! contiguous block of `m/n` points and `f_i = (n/m) sum_{j in block i} l_j`.

mod instance;
pub mod metric;
mod partition;
pub mod quadmax;
pub mod reference;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::EigenError;

pub use instance::InstanceFile;
pub use metric::{metric_loss, metric_subgradient, psd_project, MetricProblem, Triple};
pub use partition::Partition;
pub use quadmax::{quadmax_term, Branch, QuadMaxProblem, QuadMaxShape};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("data partition infeasible: {n} nodes do not evenly divide {m} points")]
    IndivisiblePartition { m: usize, n: usize },
    #[error("{0}")]
    Infeasible(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid instance file: {0}")]
    Instance(String),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Quadmax,
    Metric,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Quadmax => "quadmax",
            ProblemKind::Metric => "metric",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quadmax" => Ok(ProblemKind::Quadmax),
            "metric" => Ok(ProblemKind::Metric),
            other => Err(format!(
                "unknown problem kind '{other}' (expected quadmax or metric)"
            )),
        }
    }
}

/// Per-node first-order oracle for a partitioned convex objective.
pub trait Objective: Send + Sync {
    /// Primal dimension.
    fn dim(&self) -> usize;

    /// Number of nodes the data is split across.
    fn nodes(&self) -> usize;

    /// Local objective `f_i(x)`.
    fn eval_local(&self, node: usize, x: &[f64]) -> f64;

    /// An element of the subdifferential of `f_i` at `x`.
    fn subgradient(&self, node: usize, x: &[f64]) -> Vec<f64>;

    /// Euclidean projection onto the feasible set.
    fn project(&self, x: &[f64]) -> Vec<f64>;

    /// Lipschitz estimate for the local objectives.
    fn lipschitz(&self) -> f64;

    /// `R` with `psi(x*) <= R^2` for `psi(x) = |x|^2 / 2`.
    fn radius(&self) -> f64;

    /// `F(x) = (1/n) sum_i f_i(x)`, summed in node order.
    fn eval_global(&self, x: &[f64]) -> f64 {
        let n = self.nodes();
        (0..n).map(|i| self.eval_local(i, x)).sum::<f64>() / n as f64
    }

    /// Average of the local subgradients, a subgradient of `F`.
    fn global_subgradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.nodes();
        let mut g = vec![0.0; self.dim()];
        for i in 0..n {
            crate::linalg::axpy(1.0 / n as f64, &self.subgradient(i, x), &mut g);
        }
        g
    }
}

/// A concrete problem instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    QuadMax(QuadMaxProblem),
    Metric(MetricProblem),
}

impl Problem {
    pub fn kind(&self) -> ProblemKind {
        match self {
            Problem::QuadMax(_) => ProblemKind::Quadmax,
            Problem::Metric(_) => ProblemKind::Metric,
        }
    }

    pub fn partition(&self) -> Partition {
        match self {
            Problem::QuadMax(p) => p.partition(),
            Problem::Metric(p) => p.partition(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Problem::QuadMax(p) => p.seed(),
            Problem::Metric(p) => p.seed(),
        }
    }

    /// Replaces the Lipschitz estimate (configuration override).
    pub fn set_lipschitz(&mut self, l: f64) {
        match self {
            Problem::QuadMax(p) => p.lipschitz = l,
            Problem::Metric(p) => p.lipschitz = l,
        }
    }

    pub fn set_radius(&mut self, r: f64) {
        match self {
            Problem::QuadMax(p) => p.radius = r,
            Problem::Metric(p) => p.radius = r,
        }
    }

    fn inner(&self) -> &dyn Objective {
        match self {
            Problem::QuadMax(p) => p,
            Problem::Metric(p) => p,
        }
    }
}

impl Objective for Problem {
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn nodes(&self) -> usize {
        self.inner().nodes()
    }
    fn eval_local(&self, node: usize, x: &[f64]) -> f64 {
        self.inner().eval_local(node, x)
    }
    fn subgradient(&self, node: usize, x: &[f64]) -> Vec<f64> {
        self.inner().subgradient(node, x)
    }
    fn project(&self, x: &[f64]) -> Vec<f64> {
        self.inner().project(x)
    }
    fn lipschitz(&self) -> f64 {
        self.inner().lipschitz()
    }
    fn radius(&self) -> f64 {
        self.inner().radius()
    }
}

/// Deterministic synthetic instance with `m/n` points per node.
pub fn generate_synthetic(
    kind: ProblemKind,
    d: usize,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<Problem, ProblemError> {
    match kind {
        ProblemKind::Quadmax => {
            QuadMaxProblem::generate(d, m, n, seed, &QuadMaxShape::default()).map(Problem::QuadMax)
        }
        ProblemKind::Metric => MetricProblem::generate(d, m, n, seed).map(Problem::Metric),
    }
}

/// Per-item RNG stream so that items are independent of the total count.
pub(crate) fn item_rng(seed: u64, item: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(item.wrapping_add(1));
    rng
}
