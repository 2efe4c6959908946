use serde::{Deserialize, Serialize};

use super::{DdaError, Schedule};
use crate::cost;

/// `a(t) = scale / t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSize {
    pub scale: f64,
    pub exponent: f64,
}

impl StepSize {
    pub fn new(scale: f64, exponent: f64) -> Result<Self, DdaError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(DdaError::InvalidStep(format!(
                "scale A must be positive, got {scale}"
            )));
        }
        if !(exponent > 0.0 && exponent < 1.0) {
            return Err(DdaError::InvalidStep(format!(
                "exponent q must lie in (0, 1), got {exponent}"
            )));
        }
        Ok(StepSize { scale, exponent })
    }

    /// Step for iteration `t >= 1`.
    pub fn at(&self, t: u64) -> f64 {
        self.scale / (t as f64).powf(self.exponent)
    }
}

/// Step scale minimising the leading constant of the error bound for the
/// given schedule, with `q = 1/2`.
///
/// Every bound has the shape `R^2 / A + A L^2 K`, minimised at
/// `A = R / (L sqrt(K))`; `K` is the schedule's radicand from
/// [`cost::rate_radicand`].
pub fn optimal_step_a(
    schedule: Schedule,
    lipschitz: f64,
    radius: f64,
    lambda2: f64,
) -> Result<StepSize, DdaError> {
    schedule.validate()?;
    if !(lipschitz > 0.0 && radius > 0.0) {
        return Err(DdaError::InvalidStep(format!(
            "L and R must be positive (L = {lipschitz}, R = {radius})"
        )));
    }
    if !(0.0..1.0).contains(&lambda2) {
        return Err(DdaError::InvalidStep(format!(
            "lambda2 must lie in [0, 1), got {lambda2}"
        )));
    }
    if let Schedule::PowerLaw(p) = schedule {
        if p >= 0.5 {
            return Err(DdaError::InvalidStep(format!(
                "power-law exponent {p} leaves no valid q > p with q = 1/2"
            )));
        }
    }
    let k = cost::rate_radicand(schedule, lambda2);
    StepSize::new(radius / (lipschitz * k.sqrt()), 0.5)
}
