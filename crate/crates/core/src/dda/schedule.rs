use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DdaError;

/// When nodes run a consensus exchange.
///
/// * `EveryRound`: every iteration.
/// * `FixedPeriod(h)`: iterations `t` with `t mod h == 0`, so `h - 1`
///   cheap iterations precede each expensive one.
/// * `PowerLaw(p)`: the `H`-th exchange happens at iteration
///   `ceil(sum_{j<=H} j^p)`. Exchanges among the first `T` iterations are
///   then exactly `max { H : sum_{j<=H} j^p <= T }`, the real-valued gap
///   count, and consecutive exchanges stay distinct because each gap is at
///   least one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Schedule {
    EveryRound,
    FixedPeriod(u64),
    PowerLaw(f64),
}

impl Schedule {
    pub fn validate(&self) -> Result<(), DdaError> {
        match *self {
            Schedule::FixedPeriod(0) => Err(DdaError::InvalidSchedule(
                "period h must be at least 1".into(),
            )),
            Schedule::PowerLaw(p) if !(p >= 0.0 && p.is_finite()) => {
                Err(DdaError::InvalidSchedule(format!(
                    "power-law exponent must be finite and >= 0, got {p}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Iterations (ascending, starting from 1) on which an exchange happens.
    pub fn comm_rounds(&self) -> CommRounds {
        CommRounds {
            schedule: *self,
            count: 0,
            cumulative: 0.0,
        }
    }

    pub fn is_comm_round(&self, t: u64) -> bool {
        match *self {
            Schedule::EveryRound => true,
            Schedule::FixedPeriod(h) => t.is_multiple_of(h),
            Schedule::PowerLaw(_) => self.comm_rounds().find(|&c| c >= t) == Some(t),
        }
    }

    /// `H_T`: exchanges among iterations `1..=horizon`.
    pub fn comm_count(&self, horizon: u64) -> u64 {
        match *self {
            Schedule::EveryRound => horizon,
            Schedule::FixedPeriod(h) => horizon / h,
            Schedule::PowerLaw(_) => {
                self.comm_rounds().take_while(|&c| c <= horizon).count() as u64
            }
        }
    }

    /// Period for fixed schedules (`EveryRound` is period 1).
    pub fn period(&self) -> Option<u64> {
        match *self {
            Schedule::EveryRound => Some(1),
            Schedule::FixedPeriod(h) => Some(h),
            Schedule::PowerLaw(_) => None,
        }
    }
}

/// Iterator over communication iterations of a schedule.
#[derive(Debug, Clone)]
pub struct CommRounds {
    schedule: Schedule,
    count: u64,
    cumulative: f64,
}

impl Iterator for CommRounds {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        self.count += 1;
        Some(match self.schedule {
            Schedule::EveryRound => self.count,
            Schedule::FixedPeriod(h) => self.count * h,
            Schedule::PowerLaw(p) => {
                self.cumulative += (self.count as f64).powf(p);
                self.cumulative.ceil() as u64
            }
        })
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::EveryRound => f.write_str("every"),
            Schedule::FixedPeriod(h) => write!(f, "h{h}"),
            Schedule::PowerLaw(p) => write!(f, "p{p}"),
        }
    }
}

impl FromStr for Schedule {
    type Err = DdaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || {
            DdaError::InvalidSchedule(format!(
                "unknown schedule '{s}' (expected every, h<period> or p<exponent>)"
            ))
        };
        let schedule = if s == "every" {
            Schedule::EveryRound
        } else if let Some(h) = s.strip_prefix('h') {
            Schedule::FixedPeriod(h.parse().map_err(|_| bad())?)
        } else if let Some(p) = s.strip_prefix('p') {
            Schedule::PowerLaw(p.parse().map_err(|_| bad())?)
        } else {
            return Err(bad());
        };
        schedule.validate()?;
        Ok(schedule)
    }
}

impl TryFrom<String> for Schedule {
    type Error = DdaError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Schedule> for String {
    fn from(s: Schedule) -> String {
        s.to_string()
    }
}
