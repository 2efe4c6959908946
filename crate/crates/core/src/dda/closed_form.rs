//! Closed-form expansion of the dual accumulator under a fixed period.
//!
//! With exchanges at iterations `t'` where `t' = 1 (mod h)` and `t' > 1`,
//! unrolling the recursion gives
//!
//! ```text
//! z_i(t') = sum_{w=0}^{H-1} sum_{k=0}^{h-1} sum_j [P^(H-w)]_ij g_j(wh + k)
//!         + sum_{k=0}^{Q-1} g_i(t' - Q + k)
//! H = floor((t' - 1) / h),   Q = t' mod h, or h when that is 0.
//! ```
//!
//! The simulator exchanges when `t = 0 (mod h)` instead. Prepending a zero
//! gradient maps one convention onto the other: with `t' = t + 1`,
//! `g'(0) = 0` and `g'(s) = g(s - 1)`, the formula above evaluated on `g'`
//! at `t'` equals the simulator's `z_i(t)` exactly. `h = 1` covers
//! every-round exchange.

use super::DdaError;
use crate::linalg;
use crate::topology::ConsensusMatrix;

/// `history[s][j]` is node `j`'s subgradient `g_j(s)`, i.e. the one added
/// during iteration `s + 1`.
pub type GradientHistory = [Vec<Vec<f64>>];

pub fn closed_form_z(
    history: &GradientHistory,
    p: &ConsensusMatrix,
    h: u64,
    t: u64,
    i: usize,
) -> Result<Vec<f64>, DdaError> {
    if h == 0 {
        return Err(DdaError::InvalidSchedule(
            "period h must be at least 1".into(),
        ));
    }
    let t_us = t as usize;
    if history.len() < t_us {
        return Err(DdaError::HistoryIncomplete {
            have: history.len(),
            need: t_us,
        });
    }
    let n = p.n();
    if i >= n {
        return Err(DdaError::Dimension {
            expected: n,
            got: i + 1,
        });
    }
    let d = match history.first() {
        Some(round) => round.first().map_or(0, Vec::len),
        None => return Ok(Vec::new()),
    };
    for round in &history[..t_us] {
        if round.len() != n {
            return Err(DdaError::Dimension {
                expected: n,
                got: round.len(),
            });
        }
    }

    let shifted = t + 1;
    let g = |s: u64, j: usize| -> Option<&[f64]> {
        (s >= 1).then(|| history[(s - 1) as usize][j].as_slice())
    };
    let big_h = (shifted - 1) / h;
    let q = match shifted % h {
        0 => h,
        r => r,
    };

    // powers[k] = row i of P^k.
    let mut powers = Vec::with_capacity(big_h as usize + 1);
    let mut row = vec![0.0; n];
    row[i] = 1.0;
    powers.push(row.clone());
    for _ in 0..big_h {
        row = p.left_mul(&row);
        powers.push(row.clone());
    }

    let mut z = vec![0.0; d];
    for w in 0..big_h {
        let weights = &powers[(big_h - w) as usize];
        for k in 0..h {
            for (j, &pij) in weights.iter().enumerate() {
                if let Some(gj) = g(w * h + k, j) {
                    linalg::axpy(pij, gj, &mut z);
                }
            }
        }
    }
    for k in 0..q {
        if let Some(gi) = g(shifted - q + k, i) {
            linalg::axpy(1.0, gi, &mut z);
        }
    }
    Ok(z)
}
