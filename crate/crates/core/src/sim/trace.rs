use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const TRACE_HEADER: [&str; 7] = [
    "t",
    "virtual_time",
    "avg_F",
    "max_F",
    "max_net_err",
    "comm_rounds",
    "max_subgrad_norm",
];

/// One recorded iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: u64,
    pub virtual_time: f64,
    /// `(1/n) sum_i F(x_hat_i(t))`.
    #[serde(rename = "avg_F")]
    pub avg_f: f64,
    /// `max_i F(x_hat_i(t))`.
    #[serde(rename = "max_F")]
    pub max_f: f64,
    pub max_net_err: f64,
    pub comm_rounds: u64,
    /// Largest subgradient norm seen so far.
    pub max_subgrad_norm: f64,
}

/// First iteration at which `avg_F <= F* + epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub t: u64,
    pub virtual_time: f64,
}

/// Quantities resolved at the start of a run plus its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub iterations: u64,
    pub virtual_time: f64,
    pub comm_rounds: u64,
    pub final_avg_f: f64,
    pub hit: Option<Hit>,
    pub f_star: Option<f64>,
    /// `true` when `f_star` is certified optimal rather than the best value
    /// found by a long subgradient run.
    pub f_star_exact: bool,
    pub target: Option<f64>,
    pub lambda2: f64,
    /// Messages each node sends per exchange.
    pub degree: usize,
    pub step_a: f64,
    pub step_q: f64,
    pub lipschitz: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub summary: RunSummary,
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Trace {
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRACE_HEADER)?;
        for row in &self.rows {
            w.write_record([
                row.t.to_string(),
                format_float(row.virtual_time),
                format_float(row.avg_f),
                format_float(row.max_f),
                format_float(row.max_net_err),
                row.comm_rounds.to_string(),
                format_float(row.max_subgrad_norm),
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

    pub fn save_csv(&self, path: &Path) -> csv::Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Reads a trace CSV written by [`Trace::write_csv`].
pub fn read_trace_csv<R: io::Read>(input: R) -> csv::Result<Vec<TraceRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
