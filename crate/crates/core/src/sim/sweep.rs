use std::io;

use super::trace::{format_float, Trace};
use super::{run_with, SimConfig, SimError};
use crate::dda::Schedule;
use crate::exec::Exec;
use crate::topology::GraphKind;

pub const SWEEP_HEADER: [&str; 5] = [
    "point",
    "iters_to_target",
    "time_to_target",
    "final_avg_F",
    "converged",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Nodes,
    Schedules,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub label: String,
    pub config: SimConfig,
    pub outcome: Result<Trace, SimError>,
}

impl SweepPoint {
    pub fn trace(&self) -> Option<&Trace> {
        self.outcome.as_ref().ok()
    }

    pub fn iters_to_target(&self) -> Option<u64> {
        self.trace()?.summary.hit.map(|h| h.t)
    }

    pub fn time_to_target(&self) -> Option<f64> {
        self.trace()?.summary.hit.map(|h| h.virtual_time)
    }

    pub fn final_avg_f(&self) -> Option<f64> {
        self.trace().map(|t| t.summary.final_avg_f)
    }

    pub fn comm_rounds(&self) -> Option<u64> {
        self.trace().map(|t| t.summary.comm_rounds)
    }

    pub fn converged(&self) -> bool {
        self.iters_to_target().is_some()
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Converged point with the smallest virtual time to target; ties go to
    /// the earlier point.
    pub fn argmin_time(&self) -> Option<&SweepPoint> {
        self.points
            .iter()
            .filter_map(|p| p.time_to_target().map(|t| (t, p)))
            .fold(
                None,
                |best: Option<(f64, &SweepPoint)>, (t, p)| match best {
                    Some((bt, _)) if bt <= t => best,
                    _ => Some((t, p)),
                },
            )
            .map(|(_, p)| p)
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &SimError)> {
        self.points
            .iter()
            .filter_map(|p| p.outcome.as_ref().err().map(|e| (p.label.as_str(), e)))
    }

    pub fn point(&self, label: &str) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.label == label)
    }

    /// One row per point; unreached targets and failed runs read `NA`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let na = || "NA".to_string();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SWEEP_HEADER)?;
        for p in &self.points {
            w.write_record([
                p.label.clone(),
                p.iters_to_target().map_or_else(na, |t| t.to_string()),
                p.time_to_target().map_or_else(na, format_float),
                p.final_avg_f().map_or_else(na, format_float),
                p.converged().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }
}

fn sweep_preconditions(base: &SimConfig, empty: bool) -> Result<(), SimError> {
    if empty {
        return Err(SimError::Mismatch("sweep set is empty".into()));
    }
    if base.epsilon.is_none() {
        return Err(SimError::Mismatch(
            "sweeps measure time to target and need epsilon".into(),
        ));
    }
    Ok(())
}

/// Configuration of one point of [`sweep_n`]: a complete graph on `n`
/// nodes, with the dataset regenerated from the shared seed at the smallest
/// multiple of `n` that is at least the base `m`.
pub fn sweep_n_config(base: &SimConfig, n: usize) -> SimConfig {
    let mut c = base.clone();
    c.n = n;
    c.topology = GraphKind::Complete;
    c.degree = None;
    if n > 0 {
        c.m = base.m.div_ceil(n) * n;
    }
    c
}

fn run_points(configs: Vec<(String, SimConfig)>, exec: Exec) -> Vec<SweepPoint> {
    let outcomes = exec.map(configs.len(), |i| run_with(&configs[i].1, exec, None));
    configs
        .into_iter()
        .zip(outcomes)
        .map(|((label, config), outcome)| SweepPoint {
            label,
            config,
            outcome,
        })
        .collect()
}

/// One run per processor count on complete graphs.
pub fn sweep_n(base: &SimConfig, ns: &[usize], exec: Exec) -> Result<SweepResult, SimError> {
    sweep_preconditions(base, ns.is_empty())?;
    if base.instance.is_some() {
        return Err(SimError::Mismatch(
            "sweeping n needs a synthetic problem, not an instance file".into(),
        ));
    }
    let configs = ns
        .iter()
        .map(|&n| (n.to_string(), sweep_n_config(base, n)))
        .collect();
    Ok(SweepResult {
        axis: SweepAxis::Nodes,
        points: run_points(configs, exec),
    })
}

/// One run per schedule on the shared problem, topology and step size.
pub fn sweep_schedule(
    base: &SimConfig,
    schedules: &[Schedule],
    exec: Exec,
) -> Result<SweepResult, SimError> {
    sweep_preconditions(base, schedules.is_empty())?;
    let configs = schedules
        .iter()
        .map(|&s| {
            let mut c = base.clone();
            c.schedule = s;
            (s.to_string(), c)
        })
        .collect();
    Ok(SweepResult {
        axis: SweepAxis::Schedules,
        points: run_points(configs, exec),
    })
}
