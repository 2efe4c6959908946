//! Reference optima used as stopping targets and test oracles.
//!
//! For max-of-quadratics the optimum is computed exactly (up to a certified
//! duality gap) by writing each term as
//! `|x - c1|^2 + max(0, a^T x + b)` with `a = 2 (c1 - c2)` and
//! `b = |c2|^2 - |c1|^2`. The objective becomes a strongly convex quadratic
//! plus averaged hinges, whose box-constrained dual is maximised by exact
//! coordinate ascent. Other problems fall back to projected subgradient
//! descent.

use super::{Objective, QuadMaxProblem};
use crate::linalg;

/// Duality gap at which the exact solver stops.
pub const DEFAULT_GAP_TOL: f64 = 1e-11;
const MAX_SWEEPS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    /// Primal point recovered from the dual iterate.
    pub x: Vec<f64>,
    /// `F(x)` evaluated through the problem oracle.
    pub f_star: f64,
    /// Dual objective: a certified lower bound on the optimum.
    pub lower_bound: f64,
    pub sweeps: usize,
}

impl Reference {
    pub fn gap(&self) -> f64 {
        self.f_star - self.lower_bound
    }
}

pub fn solve_quadmax(p: &QuadMaxProblem, gap_tol: f64) -> Reference {
    let d = p.d();
    let m = p.point_count();
    let inv_m = 1.0 / m as f64;

    let mut cbar = vec![0.0; d];
    let mut mean_sq = 0.0;
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for j in 0..m {
        let (c1, c2) = (p.center1(j), p.center2(j));
        linalg::axpy(inv_m, c1, &mut cbar);
        mean_sq += inv_m * linalg::dot(c1, c1);
        a.push(
            c1.iter()
                .zip(c2)
                .map(|(u, v)| 2.0 * (u - v))
                .collect::<Vec<f64>>(),
        );
        b.push(linalg::dot(c2, c2) - linalg::dot(c1, c1));
    }
    let k_const = mean_sq - linalg::dot(&cbar, &cbar);
    let a_sq: Vec<f64> = a.iter().map(|aj| linalg::dot(aj, aj)).collect();
    let lin: Vec<f64> = (0..m).map(|j| linalg::dot(&a[j], &cbar) + b[j]).collect();

    let primal = |x: &[f64]| {
        let hinge: f64 = (0..m)
            .map(|j| (linalg::dot(&a[j], x) + b[j]).max(0.0))
            .sum();
        linalg::sq_dist(x, &cbar) + k_const + inv_m * hinge
    };

    let mut beta = vec![0.0; m];
    let mut w = vec![0.0; d];
    let mut x = cbar.clone();
    let mut sweeps = 0;
    let mut lower = f64::NEG_INFINITY;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        for j in 0..m {
            if a_sq[j] == 0.0 {
                continue;
            }
            let slope = linalg::dot(&a[j], &x) + b[j];
            let next = (beta[j] + slope / (0.5 * a_sq[j])).clamp(0.0, inv_m);
            let delta = next - beta[j];
            if delta != 0.0 {
                beta[j] = next;
                linalg::axpy(delta, &a[j], &mut w);
                linalg::axpy(-0.5 * delta, &a[j], &mut x);
            }
        }
        // Recompute x from w to stop drift from the incremental updates.
        for k in 0..d {
            x[k] = cbar[k] - 0.5 * w[k];
        }
        let dual = k_const + linalg::dot(&beta, &lin) - 0.25 * linalg::dot(&w, &w);
        lower = lower.max(dual);
        if primal(&x) - lower <= gap_tol {
            break;
        }
    }
    Reference {
        f_star: p.eval_global(&x),
        x,
        lower_bound: lower,
        sweeps,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Best {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Step rule for [`subgradient_minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `c / sqrt(t)`
    InvSqrt(f64),
    /// `c / t`, suited to strongly convex objectives.
    Inverse(f64),
}

/// Projected subgradient descent on `F` from `project(0)`, returning the
/// best iterate seen. Defaults to `InvSqrt(1 / L)`.
pub fn subgradient_minimize(obj: &dyn Objective, iters: u64, rule: Option<StepRule>) -> Best {
    let rule = rule.unwrap_or(StepRule::InvSqrt(1.0 / obj.lipschitz().max(1e-12)));
    let mut x = obj.project(&vec![0.0; obj.dim()]);
    let mut best = Best {
        value: obj.eval_global(&x),
        x: x.clone(),
    };
    for t in 1..=iters {
        let step = match rule {
            StepRule::InvSqrt(c) => c / (t as f64).sqrt(),
            StepRule::Inverse(c) => c / t as f64,
        };
        let g = obj.global_subgradient(&x);
        linalg::axpy(-step, &g, &mut x);
        x = obj.project(&x);
        let value = obj.eval_global(&x);
        if value < best.value {
            best = Best {
                x: x.clone(),
                value,
            };
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::QuadMaxShape;

    #[test]
    fn single_term_optimum_is_midpoint() {
        // max(|x - c1|^2, |x - c2|^2) is minimised at the midpoint with value |c1 - c2|^2 / 4.
        let p = QuadMaxProblem::from_parts_unchecked(
            2,
            1,
            0,
            vec![vec![1.0, 0.0]],
            vec![vec![-1.0, 2.0]],
            1.0,
            1.0,
        )
        .unwrap();
        let r = solve_quadmax(&p, 1e-13);
        assert!((r.x[0] - 0.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
        assert!((r.f_star - 2.0).abs() < 1e-10);
    }

    #[test]
    fn certificate_brackets_optimum() {
        let p = QuadMaxProblem::generate(6, 60, 3, 4, &QuadMaxShape::default()).unwrap();
        let r = solve_quadmax(&p, DEFAULT_GAP_TOL);
        assert!(r.gap() < 1e-9, "gap {}", r.gap());
        assert!(r.lower_bound <= r.f_star + 1e-12);
    }

    #[test]
    fn long_subgradient_run_never_beats_exact_optimum() {
        let p = QuadMaxProblem::generate(4, 20, 2, 8, &QuadMaxShape::default()).unwrap();
        let exact = solve_quadmax(&p, DEFAULT_GAP_TOL);
        // F is 2-strongly convex, so 1/(2t) steps converge.
        let sg = subgradient_minimize(&p, 100_000, Some(StepRule::Inverse(0.5)));
        assert!(sg.value >= exact.lower_bound - 1e-12);
        assert!(
            sg.value - exact.f_star < 1e-4,
            "subgradient best {} vs exact {}",
            sg.value,
            exact.f_star
        );
    }
}
