//! Sum of pointwise maxima of two isotropic quadratics.
//!
//! Point `j` carries two centres and contributes
//! `max(|x - c1_j|^2, |x - c2_j|^2)` to the loss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{item_rng, reference, Objective, Partition, ProblemError};
use crate::linalg;

/// Which quadratic attains the maximum. Ties resolve to `First`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    First,
    Second,
}

/// Value of one term and its active branch.
pub fn quadmax_term(x: &[f64], c1: &[f64], c2: &[f64]) -> (f64, Branch) {
    let l1 = linalg::sq_dist(x, c1);
    let l2 = linalg::sq_dist(x, c2);
    if l1 >= l2 {
        (l1, Branch::First)
    } else {
        (l2, Branch::Second)
    }
}

/// Geometry of the synthetic generator.
///
/// Each point gets a position `u` in `[0, 1)`; points are sorted by `u`, so
/// the contiguous node blocks see different stretches of the centre curve
/// and their local minimisers end up far apart.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadMaxShape {
    /// Norm of the common offset of all midpoints.
    pub offset: f64,
    /// Midpoints lie within `offset +- spread * v` along a random direction `v`.
    pub spread: f64,
    /// Typical half-distance between the two centres of a point.
    pub half_width: f64,
    /// Isotropic jitter of each midpoint.
    pub jitter: f64,
    /// Random points at which subgradient norms are sampled for `L`.
    pub lipschitz_samples: usize,
}

impl Default for QuadMaxShape {
    fn default() -> Self {
        QuadMaxShape {
            offset: 3.0,
            spread: 4.0,
            half_width: 1.5,
            jitter: 0.5,
            lipschitz_samples: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadMaxProblem {
    d: usize,
    seed: u64,
    partition: Partition,
    /// Row-major `m x d`.
    centers1: Vec<f64>,
    centers2: Vec<f64>,
    pub(crate) lipschitz: f64,
    pub(crate) radius: f64,
}

impl QuadMaxProblem {
    /// Builds a problem from explicit centres; `L` and `R` are estimated.
    pub fn from_centers(
        d: usize,
        n: usize,
        seed: u64,
        centers1: Vec<Vec<f64>>,
        centers2: Vec<Vec<f64>>,
    ) -> Result<Self, ProblemError> {
        let mut p = Self::from_parts_unchecked(d, n, seed, centers1, centers2, 0.0, 0.0)?;
        p.lipschitz = p.estimate_lipschitz(64, seed);
        p.radius = p.default_radius();
        Ok(p)
    }

    pub(crate) fn from_parts_unchecked(
        d: usize,
        n: usize,
        seed: u64,
        centers1: Vec<Vec<f64>>,
        centers2: Vec<Vec<f64>>,
        lipschitz: f64,
        radius: f64,
    ) -> Result<Self, ProblemError> {
        if d == 0 {
            return Err(ProblemError::Infeasible(
                "dimension must be positive".into(),
            ));
        }
        if centers1.len() != centers2.len() {
            return Err(ProblemError::Instance(
                "centers1 and centers2 differ in length".into(),
            ));
        }
        let partition = Partition::new(centers1.len(), n)?;
        let mut flat1 = Vec::with_capacity(d * centers1.len());
        let mut flat2 = Vec::with_capacity(d * centers1.len());
        for (a, b) in centers1.iter().zip(&centers2) {
            for c in [a, b] {
                if c.len() != d {
                    return Err(ProblemError::Dimension {
                        expected: d,
                        got: c.len(),
                    });
                }
            }
            flat1.extend_from_slice(a);
            flat2.extend_from_slice(b);
        }
        Ok(QuadMaxProblem {
            d,
            seed,
            partition,
            centers1: flat1,
            centers2: flat2,
            lipschitz,
            radius,
        })
    }

    pub fn generate(
        d: usize,
        m: usize,
        n: usize,
        seed: u64,
        shape: &QuadMaxShape,
    ) -> Result<Self, ProblemError> {
        if d == 0 {
            return Err(ProblemError::Infeasible(
                "dimension must be positive".into(),
            ));
        }
        Partition::new(m, n)?;
        // Global geometry lives on stream 0; point j uses stream j + 1.
        let mut global = ChaCha8Rng::seed_from_u64(seed);
        let direction = random_unit(&mut global, d);
        let offset_dir = random_unit(&mut global, d);
        let offset: Vec<f64> = offset_dir.iter().map(|v| v * shape.offset).collect();

        let mut points: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..m)
            .map(|j| {
                let mut rng = item_rng(seed, j as u64);
                let u: f64 = rng.random();
                let along = shape.spread * (2.0 * u - 1.0);
                let mid: Vec<f64> = (0..d)
                    .map(|k| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        offset[k] + along * direction[k] + shape.jitter * z / (d as f64).sqrt()
                    })
                    .collect();
                let half: Vec<f64> = (0..d)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        shape.half_width * z / (d as f64).sqrt()
                    })
                    .collect();
                let c1 = mid.iter().zip(&half).map(|(a, b)| a + b).collect();
                let c2 = mid.iter().zip(&half).map(|(a, b)| a - b).collect();
                (u, c1, c2)
            })
            .collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (c1, c2): (Vec<_>, Vec<_>) = points.into_iter().map(|(_, a, b)| (a, b)).unzip();

        let mut p = Self::from_parts_unchecked(d, n, seed, c1, c2, 0.0, 0.0)?;
        p.lipschitz = p.estimate_lipschitz(shape.lipschitz_samples, seed);
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

    pub fn point_count(&self) -> usize {
        self.partition.points()
    }

    pub fn center1(&self, j: usize) -> &[f64] {
        &self.centers1[j * self.d..(j + 1) * self.d]
    }

    pub fn center2(&self, j: usize) -> &[f64] {
        &self.centers2[j * self.d..(j + 1) * self.d]
    }

    pub fn centers1(&self) -> Vec<Vec<f64>> {
        self.centers1.chunks(self.d).map(<[f64]>::to_vec).collect()
    }

    pub fn centers2(&self) -> Vec<Vec<f64>> {
        self.centers2.chunks(self.d).map(<[f64]>::to_vec).collect()
    }

    /// `(1/m) sum_j max(...)` over all points in index order.
    pub fn eval_all_points(&self, x: &[f64]) -> f64 {
        let m = self.point_count();
        (0..m)
            .map(|j| quadmax_term(x, self.center1(j), self.center2(j)).0)
            .sum::<f64>()
            / m as f64
    }

    /// Minimiser of `f_i` restricted to node `i`'s block, via the exact solver.
    pub fn local_minimizer(&self, node: usize) -> Vec<f64> {
        let range = self.partition.range(node);
        let c1 = range.clone().map(|j| self.center1(j).to_vec()).collect();
        let c2 = range.map(|j| self.center2(j).to_vec()).collect();
        let single = Self::from_parts_unchecked(self.d, 1, self.seed, c1, c2, 1.0, 1.0)
            .expect("block of a valid instance is valid");
        reference::solve_quadmax(&single, reference::DEFAULT_GAP_TOL).x
    }

    /// Max subgradient norm over nodes at random points in the centres'
    /// bounding box.
    pub fn estimate_lipschitz(&self, samples: usize, seed: u64) -> f64 {
        let (lo, hi) = self.bounding_box();
        let mut rng = item_rng(seed ^ 0x4c49_5053, u64::MAX - 1);
        let mut best: f64 = 0.0;
        for _ in 0..samples {
            let x: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(&a, &b)| if b > a { rng.random_range(a..b) } else { a })
                .collect();
            for i in 0..self.partition.nodes() {
                best = best.max(linalg::norm(&self.subgradient(i, &x)));
            }
        }
        best
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.d];
        let mut hi = vec![f64::NEG_INFINITY; self.d];
        for c in self
            .centers1
            .chunks(self.d)
            .chain(self.centers2.chunks(self.d))
        {
            for k in 0..self.d {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
        (lo, hi)
    }

    /// `sqrt(psi(x*))` from the exact solver.
    fn default_radius(&self) -> f64 {
        let x = reference::solve_quadmax(self, reference::DEFAULT_GAP_TOL).x;
        (0.5 * linalg::dot(&x, &x)).sqrt()
    }
}

impl Objective for QuadMaxProblem {
    fn dim(&self) -> usize {
        self.d
    }

    fn nodes(&self) -> usize {
        self.partition.nodes()
    }

    fn eval_local(&self, node: usize, x: &[f64]) -> f64 {
        let sum: f64 = self
            .partition
            .range(node)
            .map(|j| quadmax_term(x, self.center1(j), self.center2(j)).0)
            .sum();
        self.partition.local_weight() * sum
    }

    fn subgradient(&self, node: usize, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.d];
        for j in self.partition.range(node) {
            let (c1, c2) = (self.center1(j), self.center2(j));
            let c = match quadmax_term(x, c1, c2).1 {
                Branch::First => c1,
                Branch::Second => c2,
            };
            for k in 0..self.d {
                g[k] += 2.0 * (x[k] - c[k]);
            }
        }
        let w = self.partition.local_weight();
        g.iter_mut().for_each(|v| *v *= w);
        g
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn radius(&self) -> f64 {
        self.radius
    }
}

fn random_unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let nrm = linalg::norm(&v);
        if nrm > 1e-9 {
            return v.into_iter().map(|x| x / nrm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(c1: Vec<f64>, c2: Vec<f64>) -> QuadMaxProblem {
        let d = c1.len();
        QuadMaxProblem::from_parts_unchecked(d, 1, 0, vec![c1], vec![c2], 1.0, 1.0).unwrap()
    }

    #[test]
    fn coincident_centres() {
        let p = single(vec![1.0, 2.0], vec![1.0, 2.0]);
        assert_eq!(p.eval_local(0, &[1.0, 2.0]), 0.0);
        assert_eq!(p.subgradient(0, &[1.0, 2.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn tie_picks_first_branch() {
        let p = single(vec![1.0, 0.0], vec![-1.0, 0.0]);
        assert_eq!(p.eval_local(0, &[0.0, 0.0]), 1.0);
        assert_eq!(p.subgradient(0, &[0.0, 0.0]), vec![-2.0, 0.0]);
    }

    #[test]
    fn second_branch_active() {
        let p = single(vec![1.0, 0.0], vec![-1.0, 0.0]);
        assert_eq!(p.eval_local(0, &[3.0, 0.0]), 16.0);
        assert_eq!(p.subgradient(0, &[3.0, 0.0]), vec![8.0, 0.0]);
    }

    #[test]
    fn eval_matches_brute_force_two_branch_max() {
        let p = QuadMaxProblem::generate(4, 12, 3, 9, &QuadMaxShape::default()).unwrap();
        let x = [0.3, -1.0, 2.0, 0.5];
        for i in 0..3 {
            let mut brute = 0.0;
            for j in p.partition().range(i) {
                let l1: f64 = (0..4).map(|k| (x[k] - p.center1(j)[k]).powi(2)).sum();
                let l2: f64 = (0..4).map(|k| (x[k] - p.center2(j)[k]).powi(2)).sum();
                brute += if l1 > l2 { l1 } else { l2 };
            }
            brute *= 3.0 / 12.0;
            assert!((p.eval_local(i, &x) - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn local_values_are_nonnegative() {
        let p = QuadMaxProblem::generate(3, 30, 3, 2, &QuadMaxShape::default()).unwrap();
        for x in [[0.0, 0.0, 0.0], [10.0, -4.0, 2.0], [1e-3, 5.0, -9.0]] {
            for i in 0..3 {
                assert!(p.eval_local(i, &x) >= 0.0);
            }
        }
    }

    #[test]
    fn local_minimisers_are_suboptimal_globally() {
        let p = QuadMaxProblem::generate(10, 40, 4, 1, &QuadMaxShape::default()).unwrap();
        let star = reference::solve_quadmax(&p, reference::DEFAULT_GAP_TOL);
        for i in 0..4 {
            let xi = p.local_minimizer(i);
            assert!(
                p.eval_global(&xi) - star.f_star > 0.1,
                "node {i} minimiser too close to optimum"
            );
        }
    }

    #[test]
    fn lipschitz_bounds_sampled_subgradients() {
        let p = QuadMaxProblem::generate(5, 20, 2, 4, &QuadMaxShape::default()).unwrap();
        assert!(p.lipschitz() > 0.0);
        let x = p.center1(3).to_vec();
        for i in 0..2 {
            assert!(linalg::norm(&p.subgradient(i, &x)) <= 2.0 * p.lipschitz());
        }
    }
}
