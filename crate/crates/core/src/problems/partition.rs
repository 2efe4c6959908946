use std::ops::Range;

use super::ProblemError;

/// Even split of `m` data points over `n` nodes in contiguous blocks.
///
/// Indices are zero-based: local point `j` of node `i` is global point
/// `i * (m / n) + j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    m: usize,
    n: usize,
}

impl Partition {
    pub fn new(m: usize, n: usize) -> Result<Self, ProblemError> {
        if n == 0 || m == 0 || !m.is_multiple_of(n) {
            return Err(ProblemError::IndivisiblePartition { m, n });
        }
        Ok(Partition { m, n })
    }

    pub fn points(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn per_node(&self) -> usize {
        self.m / self.n
    }

    pub fn global_index(&self, node: usize, local: usize) -> usize {
        debug_assert!(node < self.n && local < self.per_node());
        node * self.per_node() + local
    }

    pub fn locate(&self, global: usize) -> (usize, usize) {
        (global / self.per_node(), global % self.per_node())
    }

    pub fn range(&self, node: usize) -> Range<usize> {
        let k = self.per_node();
        node * k..(node + 1) * k
    }

    /// Weight `n/m` turning a block sum into `f_i`.
    pub fn local_weight(&self) -> f64 {
        self.n as f64 / self.m as f64
    }
}
