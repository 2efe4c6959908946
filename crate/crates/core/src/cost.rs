//! Virtual-time cost model and the closed-form tradeoff quantities.
//!
//! One iteration costs `1/n` time units of computation; an iteration that
//! also exchanges messages adds `k r`, where `r` is the time to send and
//! receive one message measured in units of one full-dataset subgradient.
//! Predictions drop log factors; measured runs never do.

use serde::{Deserialize, Serialize};

use crate::dda::Schedule;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CostError {
    #[error("invalid parameter {name}: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error("r = 0: communication is free and the optimal processor count is unbounded")]
    Unbounded,
    #[error("power-law exponent {0} >= 1/2 makes the iteration count diverge")]
    DivergentExponent(f64),
}

fn invalid(name: &'static str, reason: impl Into<String>) -> CostError {
    CostError::Invalid {
        name,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffParams {
    pub r: f64,
    pub n: usize,
    pub k: usize,
    pub lambda2: f64,
    pub lipschitz: f64,
    pub radius: f64,
}

impl TradeoffParams {
    pub fn validate(&self) -> Result<(), CostError> {
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(invalid(
                "r",
                format!("must be finite and >= 0, got {}", self.r),
            ));
        }
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if self.k > self.n - 1 {
            return Err(invalid(
                "k",
                format!("degree {} exceeds n - 1 = {}", self.k, self.n - 1),
            ));
        }
        if !(0.0..1.0).contains(&self.lambda2) {
            return Err(invalid(
                "lambda2",
                format!("must lie in [0, 1), got {}", self.lambda2),
            ));
        }
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return Err(invalid(
                "L",
                format!("must be positive, got {}", self.lipschitz),
            ));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid(
                "R",
                format!("must be positive, got {}", self.radius),
            ));
        }
        Ok(())
    }

    /// Complete graph on `n` nodes with uniform mixing (`lambda2 = 0`).
    pub fn complete(n: usize, r: f64) -> Self {
        TradeoffParams {
            r,
            n,
            k: n.saturating_sub(1),
            lambda2: 0.0,
            lipschitz: 1.0,
            radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub compute_time: f64,
    pub comm_time: f64,
    pub total: f64,
}

impl CostBreakdown {
    fn new(compute_time: f64, comm_time: f64) -> Self {
        CostBreakdown {
            compute_time,
            comm_time,
            total: compute_time + comm_time,
        }
    }
}

/// `1/n + k r`: cost of one iteration that communicates.
pub fn iteration_cost(params: &TradeoffParams) -> f64 {
    1.0 / params.n as f64 + params.k as f64 * params.r
}

/// Time for `t` iterations: `T/n + H_T k r`.
#[allow(non_snake_case)]
pub fn tau_of_T(t: u64, params: &TradeoffParams, schedule: Schedule) -> CostBreakdown {
    breakdown(t, schedule.comm_count(t), params.n, params.k, params.r)
}

/// `t/n + comm k r` for `t` iterations of which `comm` exchanged messages.
pub fn breakdown(t: u64, comm: u64, n: usize, k: usize, r: f64) -> CostBreakdown {
    CostBreakdown::new(t as f64 / n as f64, comm as f64 * k as f64 * r)
}

/// `1 / sqrt(r)`, the processor count minimising time-to-accuracy on a
/// complete graph.
pub fn n_opt(r: f64) -> Result<f64, CostError> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(invalid("r", format!("must be finite and >= 0, got {r}")));
    }
    if r == 0.0 {
        return Err(CostError::Unbounded);
    }
    Ok(1.0 / r.sqrt())
}

/// `sqrt(n k r / (18 + 12 / (1 - sqrt(lambda2))))`, real-valued.
///
/// Callers use `max(1, round(h_opt))`; [`h_opt_period`] does that.
pub fn h_opt(params: &TradeoffParams) -> f64 {
    let denom = 18.0 + 12.0 / spectral_term(params.lambda2);
    (params.n as f64 * params.k as f64 * params.r / denom).sqrt()
}

/// `max(1, round(h_opt))` with halves rounded up.
pub fn h_opt_period(params: &TradeoffParams) -> u64 {
    (h_opt(params) + 0.5).floor().max(1.0) as u64
}

fn spectral_term(lambda2: f64) -> f64 {
    1.0 - lambda2.max(0.0).sqrt()
}

/// Radicand `K` of the leading constant `2 L R sqrt(K)` in the error bound
/// of each schedule.
pub fn rate_radicand(schedule: Schedule, lambda2: f64) -> f64 {
    let gap = spectral_term(lambda2);
    match schedule {
        Schedule::EveryRound => 19.0 + 12.0 / gap,
        Schedule::FixedPeriod(h) => {
            let h = h as f64;
            1.0 + 18.0 * h + 12.0 * h / gap
        }
        Schedule::PowerLaw(p) => {
            7.0 + (12.0 * p + 12.0) / ((3.0 * p + 1.0) * gap) + 12.0 / (2.0 * p + 1.0)
        }
    }
}

pub fn constant_c1(lipschitz: f64, radius: f64, lambda2: f64) -> f64 {
    2.0 * lipschitz * radius * rate_radicand(Schedule::EveryRound, lambda2).sqrt()
}

pub fn constant_ch(lipschitz: f64, radius: f64, lambda2: f64, h: u64) -> f64 {
    2.0 * lipschitz * radius * rate_radicand(Schedule::FixedPeriod(h), lambda2).sqrt()
}

pub fn constant_cp(lipschitz: f64, radius: f64, lambda2: f64, p: f64) -> f64 {
    2.0 * lipschitz * radius * rate_radicand(Schedule::PowerLaw(p), lambda2).sqrt()
}

/// Beyond this many iterations the power-law exchange count is taken from
/// the integral approximation rather than counted.
const EXACT_COUNT_LIMIT: f64 = 1e7;

/// Predicted time to reach accuracy `epsilon`, log factors dropped.
///
/// * every round: `(C_1 / eps)^2 (1/n + k r)`
/// * period `h`: `(C_h / eps)^2 (1/n + k r / h)`
/// * power law `p < 1/2`: `T = (C_p / eps)^(2 / (1 - 2p))` iterations, charged
///   `T/n + H_T k r`. The bound only fixes the order of this quantity, so it is
///   a prediction with unspecified constants.
pub fn tau_epsilon(
    epsilon: f64,
    params: &TradeoffParams,
    regime: Schedule,
) -> Result<f64, CostError> {
    params.validate()?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(
            "epsilon",
            format!("must be positive, got {epsilon}"),
        ));
    }
    regime
        .validate()
        .map_err(|e| invalid("schedule", e.to_string()))?;
    let (l, r, lam) = (params.lipschitz, params.radius, params.lambda2);
    let inv_n = 1.0 / params.n as f64;
    let kr = params.k as f64 * params.r;
    Ok(match regime {
        Schedule::EveryRound => (constant_c1(l, r, lam) / epsilon).powi(2) * (inv_n + kr),
        Schedule::FixedPeriod(h) => {
            (constant_ch(l, r, lam, h) / epsilon).powi(2) * (inv_n + kr / h as f64)
        }
        Schedule::PowerLaw(p) => {
            if p >= 0.5 {
                return Err(CostError::DivergentExponent(p));
            }
            let iters = (constant_cp(l, r, lam, p) / epsilon).powf(2.0 / (1.0 - 2.0 * p));
            let comm = if iters <= EXACT_COUNT_LIMIT {
                regime.comm_count(iters.ceil() as u64) as f64
            } else {
                ((p + 1.0) * iters).powf(1.0 / (p + 1.0))
            };
            iters * inv_n + comm * kr
        }
    })
}

/// `comm_seconds / comp_seconds`.
pub fn estimate_r(comp_seconds: f64, comm_seconds: f64) -> Result<f64, CostError> {
    if !(comp_seconds > 0.0 && comp_seconds.is_finite()) {
        return Err(invalid(
            "comp_seconds",
            format!("must be positive, got {comp_seconds}"),
        ));
    }
    if !(comm_seconds >= 0.0 && comm_seconds.is_finite()) {
        return Err(invalid(
            "comm_seconds",
            format!("must be finite and >= 0, got {comm_seconds}"),
        ));
    }
    Ok(comm_seconds / comp_seconds)
}
