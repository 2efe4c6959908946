//! Hinge-loss Mahalanobis metric learning.
//!
//! The primal variable packs `(A, b)` into `d^2 + 1` entries: `A` row-major,
//! then `b`. The feasible set is `A` positive semidefinite and `b >= 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{item_rng, reference, Objective, Partition, ProblemError};
use crate::linalg;

/// Labelled pair: `s = +1` similar, `s = -1` dissimilar.
#[derive(Debug, Clone, PartialEq)]
pub struct Triple {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub s: f64,
}

impl Triple {
    fn diff(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(a, b)| a - b).collect()
    }
}

fn check_dims(a: &[f64], t: &Triple) -> Result<usize, ProblemError> {
    let d = t.u.len();
    if t.v.len() != d {
        return Err(ProblemError::Dimension {
            expected: d,
            got: t.v.len(),
        });
    }
    if a.len() != d * d {
        return Err(ProblemError::Dimension {
            expected: d * d,
            got: a.len(),
        });
    }
    Ok(d)
}

/// `(u - v)^T A (u - v)` for row-major `A`.
fn mahalanobis_sq(a: &[f64], delta: &[f64]) -> f64 {
    let d = delta.len();
    (0..d)
        .map(|r| delta[r] * linalg::dot(&a[r * d..(r + 1) * d], delta))
        .sum()
}

/// `max(0, s (D_A(u, v)^2 - b) + 1)`.
pub fn metric_loss(a: &[f64], b: f64, t: &Triple) -> Result<f64, ProblemError> {
    check_dims(a, t)?;
    let margin = t.s * (mahalanobis_sq(a, &t.diff()) - b);
    Ok((margin + 1.0).max(0.0))
}

/// Subgradient `(dA, db)`: zero when `s (D^2 - b) <= -1`, otherwise
/// `(s (u - v)(u - v)^T, -s)`.
pub fn metric_subgradient(a: &[f64], b: f64, t: &Triple) -> Result<(Vec<f64>, f64), ProblemError> {
    let d = check_dims(a, t)?;
    let delta = t.diff();
    if t.s * (mahalanobis_sq(a, &delta) - b) <= -1.0 {
        return Ok((vec![0.0; d * d], 0.0));
    }
    let mut da = vec![0.0; d * d];
    for r in 0..d {
        for c in 0..d {
            da[r * d + c] = t.s * delta[r] * delta[c];
        }
    }
    Ok((da, -t.s))
}

/// Projects a packed `(A, b)` onto `{A >= 0, b >= 1}`.
pub fn psd_project(x: &[f64], d: usize) -> Result<Vec<f64>, ProblemError> {
    if x.len() != d * d + 1 {
        return Err(ProblemError::Dimension {
            expected: d * d + 1,
            got: x.len(),
        });
    }
    let mut sym = vec![0.0; d * d];
    for r in 0..d {
        for c in 0..d {
            sym[r * d + c] = 0.5 * (x[r * d + c] + x[c * d + r]);
        }
    }
    let (values, vectors) = linalg::symmetric_eigen(d, &sym)?;
    let mut out = vec![0.0; d * d + 1];
    for (k, &lam) in values.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let v = vectors.column(k);
        for r in 0..d {
            for c in 0..d {
                out[r * d + c] += lam * v[r] * v[c];
            }
        }
    }
    // Reconstruction can leave ~1e-17 asymmetry.
    for r in 0..d {
        for c in (r + 1)..d {
            let avg = 0.5 * (out[r * d + c] + out[c * d + r]);
            out[r * d + c] = avg;
            out[c * d + r] = avg;
        }
    }
    out[d * d] = x[d * d].max(1.0);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricProblem {
    d: usize,
    seed: u64,
    partition: Partition,
    triples: Vec<Triple>,
    pub(crate) lipschitz: f64,
    pub(crate) radius: f64,
}

/// Clusters used by the synthetic generator.
const CLUSTERS: usize = 3;
/// Subgradient-descent iterations behind the default `R`.
const RADIUS_SOLVE_ITERS: u64 = 4000;

impl MetricProblem {
    pub(crate) fn from_parts_unchecked(
        d: usize,
        n: usize,
        seed: u64,
        triples: Vec<Triple>,
        lipschitz: f64,
        radius: f64,
    ) -> Result<Self, ProblemError> {
        if d == 0 {
            return Err(ProblemError::Infeasible(
                "dimension must be positive".into(),
            ));
        }
        let partition = Partition::new(triples.len(), n)?;
        for t in &triples {
            for len in [t.u.len(), t.v.len()] {
                if len != d {
                    return Err(ProblemError::Dimension {
                        expected: d,
                        got: len,
                    });
                }
            }
            if t.s != 1.0 && t.s != -1.0 {
                return Err(ProblemError::Instance(format!(
                    "label {} is not +1 or -1",
                    t.s
                )));
            }
        }
        Ok(MetricProblem {
            d,
            seed,
            partition,
            triples,
            lipschitz,
            radius,
        })
    }

    /// Pairs drawn around a few Gaussian clusters; similar iff same cluster.
    pub fn generate(d: usize, m: usize, n: usize, seed: u64) -> Result<Self, ProblemError> {
        if d == 0 {
            return Err(ProblemError::Infeasible(
                "dimension must be positive".into(),
            ));
        }
        Partition::new(m, n)?;
        let scale = 1.0 / (d as f64).sqrt();
        let mut global = ChaCha8Rng::seed_from_u64(seed);
        let means: Vec<Vec<f64>> = (0..CLUSTERS)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        let v: f64 = StandardNormal.sample(&mut global);
                        2.0 * v
                    })
                    .collect()
            })
            .collect();
        let triples = (0..m)
            .map(|j| {
                let mut rng = item_rng(seed, j as u64);
                let cu = rng.random_range(0..CLUSTERS);
                let cv = if rng.random_bool(0.5) {
                    cu
                } else {
                    (cu + rng.random_range(1..CLUSTERS)) % CLUSTERS
                };
                let mut draw = |c: usize| -> Vec<f64> {
                    (0..d)
                        .map(|k| {
                            scale
                                * (means[c][k]
                                    + Distribution::<f64>::sample(&StandardNormal, &mut rng))
                        })
                        .collect()
                };
                let u = draw(cu);
                let v = draw(cv);
                Triple {
                    u,
                    v,
                    s: if cu == cv { 1.0 } else { -1.0 },
                }
            })
            .collect();
        let mut p = Self::from_parts_unchecked(d, n, seed, triples, 0.0, 0.0)?;
        p.lipschitz = p.estimate_lipschitz(64, seed);
        p.radius = p.default_radius();
        Ok(p)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// Splits a packed vector into `(A, b)`.
    pub fn decode<'a>(&self, x: &'a [f64]) -> (&'a [f64], f64) {
        (&x[..self.d * self.d], x[self.d * self.d])
    }

    pub fn encode(a: &[f64], b: f64) -> Vec<f64> {
        let mut x = a.to_vec();
        x.push(b);
        x
    }

    pub fn eval_all_points(&self, x: &[f64]) -> f64 {
        let (a, b) = self.decode(x);
        let sum: f64 = self
            .triples
            .iter()
            .map(|t| metric_loss(a, b, t).expect("validated dims"))
            .sum();
        sum / self.triples.len() as f64
    }

    /// Max subgradient norm at random feasible points `A = B B^T / d`,
    /// `b` in `[1, 3]`.
    pub fn estimate_lipschitz(&self, samples: usize, seed: u64) -> f64 {
        let d = self.d;
        let mut rng = item_rng(seed ^ 0x4d45_5452, u64::MAX - 1);
        let mut best: f64 = 0.0;
        for _ in 0..samples {
            let bmat: Vec<f64> = (0..d * d)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let mut a = vec![0.0; d * d];
            for r in 0..d {
                for c in 0..d {
                    a[r * d + c] =
                        linalg::dot(&bmat[r * d..(r + 1) * d], &bmat[c * d..(c + 1) * d])
                            / d as f64;
                }
            }
            let x = Self::encode(&a, rng.random_range(1.0..3.0));
            for i in 0..self.partition.nodes() {
                best = best.max(linalg::norm(&self.subgradient(i, &x)));
            }
        }
        best
    }

    fn default_radius(&self) -> f64 {
        let best = reference::subgradient_minimize(self, RADIUS_SOLVE_ITERS, None);
        (0.5 * linalg::dot(&best.x, &best.x)).sqrt()
    }
}

impl Objective for MetricProblem {
    fn dim(&self) -> usize {
        self.d * self.d + 1
    }

    fn nodes(&self) -> usize {
        self.partition.nodes()
    }

    fn eval_local(&self, node: usize, x: &[f64]) -> f64 {
        let (a, b) = self.decode(x);
        let sum: f64 = self.triples[self.partition.range(node)]
            .iter()
            .map(|t| metric_loss(a, b, t).expect("validated dims"))
            .sum();
        self.partition.local_weight() * sum
    }

    fn subgradient(&self, node: usize, x: &[f64]) -> Vec<f64> {
        let (a, b) = self.decode(x);
        let mut g = vec![0.0; self.dim()];
        for t in &self.triples[self.partition.range(node)] {
            let (da, db) = metric_subgradient(a, b, t).expect("validated dims");
            linalg::axpy(1.0, &da, &mut g[..self.d * self.d]);
            g[self.d * self.d] += db;
        }
        let w = self.partition.local_weight();
        g.iter_mut().for_each(|v| *v *= w);
        g
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        psd_project(x, self.d).expect("packed vector has the problem's layout")
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn radius(&self) -> f64 {
        self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const I2: [f64; 4] = [1.0, 0.0, 0.0, 1.0];

    fn pair(delta: [f64; 2], s: f64) -> Triple {
        Triple {
            u: vec![delta[0], delta[1]],
            v: vec![0.0, 0.0],
            s,
        }
    }

    #[test]
    fn loss_examples() {
        assert_eq!(metric_loss(&I2, 1.0, &pair([1.0, 0.0], 1.0)).unwrap(), 1.0);
        assert_eq!(
            metric_loss(&[0.0; 4], 1.0, &pair([3.0, -2.0], 1.0)).unwrap(),
            0.0
        );
        assert_eq!(metric_loss(&I2, 1.0, &pair([2.0, 0.0], -1.0)).unwrap(), 0.0);
    }

    #[test]
    fn subgradient_examples() {
        let (da, db) = metric_subgradient(&I2, 1.0, &pair([1.0, 0.0], 1.0)).unwrap();
        assert_eq!((da, db), (vec![1.0, 0.0, 0.0, 0.0], -1.0));
        let (da, db) = metric_subgradient(&I2, 3.0, &pair([1.0, 0.0], 1.0)).unwrap();
        assert_eq!((da, db), (vec![0.0; 4], 0.0));
        // D^2 = 1, b = 1: margin 0 > -1, active.
        let (_, db) = metric_subgradient(&I2, 1.0, &pair([1.0, 0.0], -1.0)).unwrap();
        assert_eq!(db, 1.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let t = pair([1.0, 0.0], 1.0);
        assert!(matches!(
            metric_loss(&[1.0; 9], 1.0, &t),
            Err(ProblemError::Dimension { .. })
        ));
        assert!(metric_subgradient(&[1.0], 1.0, &t).is_err());
        assert!(psd_project(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn projection_examples() {
        let out = psd_project(&[1.0, 0.0, 0.0, -2.0, 0.3], 2).unwrap();
        for (got, want) in out.iter().zip([1.0, 0.0, 0.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        let psd = [2.0, 0.5, 0.5, 1.0, 2.0];
        for (got, want) in psd_project(&psd, 2).unwrap().iter().zip(psd) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        let out = psd_project(&[0.0, 1.0, 1.0, 0.0, 1.0], 2).unwrap();
        for (got, want) in out.iter().zip([0.5, 0.5, 0.5, 0.5, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn proximal_composition_stays_psd() {
        // z pushing A towards diag(-1, 1): x = project(-a z).
        let z = [1.0, 0.0, 0.0, -1.0, -0.5];
        let x: Vec<f64> = z.iter().map(|v| -v).collect();
        let out = psd_project(&x, 2).unwrap();
        let (vals, _) = linalg::symmetric_eigen(2, &out[..4]).unwrap();
        assert!(vals[1] >= -1e-10);
        assert!(out[4] >= 1.0);
    }

    proptest! {
        #[test]
        fn projection_is_feasible_and_idempotent(raw in prop::collection::vec(-5.0f64..5.0, 10)) {
            let d = 3;
            let once = psd_project(&raw, d).unwrap();
            let (vals, _) = linalg::symmetric_eigen(d, &once[..d * d]).unwrap();
            prop_assert!(vals[d - 1] >= -1e-10);
            prop_assert!(once[d * d] >= 1.0);
            let twice = psd_project(&once, d).unwrap();
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn encoded_symmetric_matrix_decodes_symmetric() {
        let p = MetricProblem::generate(3, 12, 2, 1).unwrap();
        let a = [2.0, 0.1, 0.3, 0.1, 1.0, -0.2, 0.3, -0.2, 4.0];
        let x = MetricProblem::encode(&a, 1.5);
        let (da, b) = p.decode(&x);
        assert_eq!(b, 1.5);
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(da[r * 3 + c], da[c * 3 + r]);
            }
        }
    }
}
