//! Communication graphs, Metropolis consensus matrices and spectral data.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, EigenError};

/// Tolerance used when checking row and column sums of a consensus matrix.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Number of configuration-model pairings attempted before giving up.
pub const REGULAR_RETRY_BUDGET: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("no simple {k}-regular graph on {n} nodes (need n*k even and 1 <= k < n)")]
    Infeasible { n: usize, k: usize },
    #[error("failed to build a connected simple {k}-regular graph on {n} nodes after {attempts} attempts")]
    ConstructionFailed { n: usize, k: usize, attempts: usize },
    #[error("graph must have at least one node")]
    Empty,
    #[error("graph is not connected")]
    Disconnected,
    #[error("matrix is not doubly stochastic: {0}")]
    NotStochastic(String),
    #[error("row index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
    #[error(
        "consensus matrix has |lambda_min| = {lambda_min_abs:.6} exceeding lambda2 = {lambda2:.6}; \
         bounds using sqrt(lambda2) would be invalid"
    )]
    SpectrumRejected { lambda2: f64, lambda_min_abs: f64 },
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Complete,
    RegularExpander,
    Ring,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Complete => "complete",
            GraphKind::RegularExpander => "expander",
            GraphKind::Ring => "ring",
        })
    }
}

/// Undirected simple graph stored as sorted neighbour lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    kind: GraphKind,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    fn from_edges(
        kind: GraphKind,
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let mut sets = vec![BTreeSet::new(); n];
        for (a, b) in edges {
            sets[a].insert(b);
            sets[b].insert(a);
        }
        let adjacency = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        Graph { kind, adjacency }
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Common degree if every node has the same number of neighbours.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adjacency.first()?.len();
        self.adjacency.iter().all(|a| a.len() == d).then_some(d)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        reached == n
    }
}

/// Every distinct pair adjacent; degree `n - 1`.
pub fn complete_graph(n: usize) -> Result<Graph, TopologyError> {
    if n == 0 {
        return Err(TopologyError::Empty);
    }
    let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)));
    Ok(Graph::from_edges(GraphKind::Complete, n, edges))
}

/// Cycle on `n` nodes. `n = 2` gives a single edge, `n = 1` no edges.
pub fn ring(n: usize) -> Result<Graph, TopologyError> {
    if n == 0 {
        return Err(TopologyError::Empty);
    }
    let edges = (0..n).map(|i| (i, (i + 1) % n)).filter(|(a, b)| a != b);
    Ok(Graph::from_edges(GraphKind::Ring, n, edges))
}

/// Random simple connected `k`-regular graph from the configuration model.
///
/// Stubs are shuffled and paired; pairings with self-loops or repeated edges
/// are rejected, as are disconnected results. The same seed always yields
/// the same edge set.
pub fn random_regular_graph(n: usize, k: usize, seed: u64) -> Result<Graph, TopologyError> {
    if n == 0 || k == 0 || k >= n || !(n * k).is_multiple_of(2) {
        return Err(TopologyError::Infeasible { n, k });
    }
    if k == n - 1 {
        let mut g = complete_graph(n)?;
        g.kind = GraphKind::RegularExpander;
        return Ok(g);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, k)).collect();
    'attempt: for _ in 0..REGULAR_RETRY_BUDGET {
        stubs.shuffle(&mut rng);
        let mut seen = BTreeSet::new();
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
        }
        let g = Graph::from_edges(GraphKind::RegularExpander, n, seen);
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(TopologyError::ConstructionFailed {
        n,
        k,
        attempts: REGULAR_RETRY_BUDGET,
    })
}

/// Dense doubly stochastic mixing matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusMatrix {
    n: usize,
    weights: Vec<f64>,
}

impl ConsensusMatrix {
    /// Validates nonnegativity and unit row/column sums.
    pub fn from_row_major(n: usize, weights: Vec<f64>) -> Result<Self, TopologyError> {
        if n == 0 {
            return Err(TopologyError::Empty);
        }
        if weights.len() != n * n {
            return Err(TopologyError::NotStochastic(format!(
                "expected {} entries, got {}",
                n * n,
                weights.len()
            )));
        }
        let p = ConsensusMatrix { n, weights };
        if let Some(w) = p.weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(TopologyError::NotStochastic(format!(
                "entry {w} is negative or not finite"
            )));
        }
        let (row_dev, col_dev) = p.stochastic_deviation();
        if row_dev > STOCHASTIC_TOL || col_dev > STOCHASTIC_TOL {
            return Err(TopologyError::NotStochastic(format!(
                "row-sum deviation {row_dev:e}, column-sum deviation {col_dev:e}"
            )));
        }
        Ok(p)
    }

    pub fn identity(n: usize) -> Self {
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            weights[i * n + i] = 1.0;
        }
        ConsensusMatrix { n, weights }
    }

    /// `(1/n) * ones(n, n)`: exact averaging in one step.
    pub fn uniform(n: usize) -> Self {
        ConsensusMatrix {
            n,
            weights: vec![1.0 / n as f64; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.weights
    }

    /// Maximum absolute deviation of row sums and of column sums from 1.
    pub fn stochastic_deviation(&self) -> (f64, f64) {
        let n = self.n;
        let row = (0..n)
            .map(|i| (self.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        let col = (0..n)
            .map(|j| ((0..n).map(|i| self.get(i, j)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        (row, col)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// True if every positive off-diagonal weight sits on an edge of `g`.
    pub fn respects(&self, g: &Graph) -> bool {
        self.n == g.n()
            && (0..self.n)
                .all(|i| (0..self.n).all(|j| i == j || self.get(i, j) == 0.0 || g.has_edge(i, j)))
    }

    /// Row vector times matrix: `(v^T P)_j = sum_i v_i P_ij`.
    pub fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                linalg::axpy(vi, self.row(i), &mut out);
            }
        }
        out
    }
}

/// Metropolis-Hastings weights: `1 / (1 + max(deg i, deg j))` on edges,
/// remainder on the diagonal.
pub fn metropolis_matrix(g: &Graph) -> Result<ConsensusMatrix, TopologyError> {
    if !g.is_connected() {
        return Err(TopologyError::Disconnected);
    }
    let n = g.n();
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        let mut off = 0.0;
        for &j in g.neighbors(i) {
            let w = 1.0 / (1 + g.degree(i).max(g.degree(j))) as f64;
            weights[i * n + j] = w;
            off += w;
        }
        weights[i * n + i] = 1.0 - off;
    }
    ConsensusMatrix::from_row_major(n, weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralInfo {
    /// Second-largest signed eigenvalue.
    pub lambda2: f64,
    /// Smallest eigenvalue, kept to justify using `lambda2` in the bounds.
    pub lambda_min: f64,
    /// `1 - sqrt(max(lambda2, 0))`.
    pub gap: f64,
}

/// Slack allowed when comparing `|lambda_min|` against `lambda2`.
const MODULUS_TOL: f64 = 1e-9;

pub fn spectral_info(p: &ConsensusMatrix) -> Result<SpectralInfo, TopologyError> {
    if p.n() == 1 {
        return Ok(SpectralInfo {
            lambda2: 0.0,
            lambda_min: 1.0,
            gap: 1.0,
        });
    }
    let (values, _) = linalg::symmetric_eigen(p.n(), p.as_row_major())?;
    let lambda2 = values[1];
    let lambda_min = values[values.len() - 1];
    if lambda_min.abs() > lambda2.max(0.0) + MODULUS_TOL {
        return Err(TopologyError::SpectrumRejected {
            lambda2,
            lambda_min_abs: lambda_min.abs(),
        });
    }
    Ok(SpectralInfo {
        lambda2,
        lambda_min,
        gap: 1.0 - lambda2.max(0.0).sqrt(),
    })
}

/// `|| (1/n) 1^T - [P^t]_{i,:} ||_1`, computed by `t` row-vector products.
pub fn mixing_l1_distance(p: &ConsensusMatrix, t: u32, i: usize) -> Result<f64, TopologyError> {
    let n = p.n();
    if i >= n {
        return Err(TopologyError::IndexOutOfRange { index: i, n });
    }
    let mut row = vec![0.0; n];
    row[i] = 1.0;
    for _ in 0..t {
        row = p.left_mul(&row);
    }
    let target = 1.0 / n as f64;
    Ok(row.iter().map(|v| (target - v).abs()).sum())
}
