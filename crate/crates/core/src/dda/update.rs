use super::DdaError;
use crate::exec::Exec;
use crate::linalg;
use crate::problems::Objective;
use crate::topology::ConsensusMatrix;

/// Dual accumulator, current primal point and running average of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub t: u64,
}

impl NodeState {
    /// `z = 0`, `x = x_hat = project(0)`, `t = 0`.
    pub fn initial(oracle: &dyn Objective) -> Self {
        let d = oracle.dim();
        let x = oracle.project(&vec![0.0; d]);
        NodeState {
            z: vec![0.0; d],
            x_hat: x.clone(),
            x,
            t: 0,
        }
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), DdaError> {
    if expected == got {
        Ok(())
    } else {
        Err(DdaError::Dimension { expected, got })
    }
}

/// `z_i <- sum_j P_ij z_j + g_i` from a snapshot of the previous `z`.
pub fn consensus_update(
    p: &ConsensusMatrix,
    z: &[Vec<f64>],
    gradients: &[Vec<f64>],
    exec: Exec,
) -> Result<Vec<Vec<f64>>, DdaError> {
    let n = p.n();
    check_len(n, z.len())?;
    check_len(n, gradients.len())?;
    let d = z.first().map_or(0, Vec::len);
    for v in z.iter().chain(gradients) {
        check_len(d, v.len())?;
    }
    Ok(exec.map(n, |i| {
        let mut out = gradients[i].clone();
        for (j, zj) in z.iter().enumerate() {
            let w = p.get(i, j);
            if w != 0.0 {
                linalg::axpy(w, zj, &mut out);
            }
        }
        out
    }))
}

/// Cheap round: `z_i <- z_i + g_i`.
pub fn local_update(z: &[f64], gradient: &[f64]) -> Result<Vec<f64>, DdaError> {
    check_len(z.len(), gradient.len())?;
    Ok(z.iter().zip(gradient).map(|(a, b)| a + b).collect())
}

/// `argmin_x <z, x> + |x|^2 / (2a)` over the feasible set, i.e. `project(-a z)`.
pub fn proximal_step(z: &[f64], a: f64, oracle: &dyn Objective) -> Vec<f64> {
    oracle.project(&linalg::scaled(-a, z))
}

/// `((t - 1) x_hat + x) / t` for `t >= 1`.
pub fn running_average(x_hat: &[f64], x: &[f64], t: u64) -> Vec<f64> {
    debug_assert!(t >= 1);
    if t == 1 {
        return x.to_vec();
    }
    let tf = t as f64;
    x_hat
        .iter()
        .zip(x)
        .map(|(h, v)| ((tf - 1.0) * h + v) / tf)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkError {
    /// `|z_bar - z_i|` per node.
    pub per_node: Vec<f64>,
    pub max: f64,
}

/// Disagreement of each node's accumulator with the network mean.
pub fn network_error(z: &[Vec<f64>]) -> NetworkError {
    let n = z.len();
    if n == 0 {
        return NetworkError {
            per_node: Vec::new(),
            max: 0.0,
        };
    }
    let mut mean = vec![0.0; z[0].len()];
    for zi in z {
        linalg::axpy(1.0, zi, &mut mean);
    }
    mean.iter_mut().for_each(|v| *v /= n as f64);
    let per_node: Vec<f64> = z
        .iter()
        .map(|zi| linalg::sq_dist(zi, &mean).sqrt())
        .collect();
    let max = per_node.iter().copied().fold(0.0, f64::max);
    NetworkError { per_node, max }
}
