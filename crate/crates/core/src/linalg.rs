//! Small dense vector helpers and a symmetric eigendecomposition wrapper.

use nalgebra::{DMatrix, SymmetricEigen};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

/// Eigenvalues (descending) and matching eigenvectors (as columns) of a
/// symmetric matrix given in row-major order.
pub fn symmetric_eigen(
    n: usize,
    row_major: &[f64],
) -> Result<(Vec<f64>, DMatrix<f64>), EigenError> {
    if row_major.len() != n * n {
        return Err(EigenError::Shape {
            n,
            len: row_major.len(),
        });
    }
    if row_major.iter().any(|v| !v.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let m = DMatrix::from_row_slice(n, n, row_major);
    let eig = SymmetricEigen::try_new(m, 1e-14, 10_000).ok_or(EigenError::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EigenError {
    #[error("expected a {n}x{n} matrix, got {len} entries")]
    Shape { n: usize, len: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("symmetric eigensolver did not converge")]
    NoConvergence,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_descending() {
        let (vals, vecs) = symmetric_eigen(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] + 1.0).abs() < 1e-14);
        let v = vecs.column(0);
        assert!((v[0].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn eigen_rejects_nan() {
        assert_eq!(
            symmetric_eigen(1, &[f64::NAN]).unwrap_err(),
            EigenError::NonFinite
        );
    }
}
