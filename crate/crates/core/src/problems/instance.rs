//! JSON instance files.
//!
//! ```json
//! {
//!   "kind": "quadmax", "d": 10, "m": 40, "n": 4, "seed": 1,
//!   "lipschitz": 12.3, "radius": 2.1,
//!   "data": { "centers1": [[...], ...], "centers2": [[...], ...] }
//! }
//! ```
//!
//! Metric instances carry `"data": { "u": [[...]], "v": [[...]], "s": [1, -1, ...] }`.
//! Floats are written in shortest round-trip form, so loading a file and
//! writing it back reproduces it byte for byte.

use serde::{Deserialize, Serialize};

use super::{MetricProblem, Problem, ProblemError, ProblemKind, QuadMaxProblem, Triple};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub kind: ProblemKind,
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub lipschitz: f64,
    pub radius: f64,
    pub data: InstanceData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum InstanceData {
    QuadMax {
        centers1: Vec<Vec<f64>>,
        centers2: Vec<Vec<f64>>,
    },
    Metric {
        u: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
        s: Vec<i8>,
    },
}

impl InstanceFile {
    pub fn from_problem(p: &Problem) -> Self {
        let part = p.partition();
        let (d, data, lipschitz, radius) = match p {
            Problem::QuadMax(q) => (
                q.d(),
                InstanceData::QuadMax {
                    centers1: q.centers1(),
                    centers2: q.centers2(),
                },
                q.lipschitz,
                q.radius,
            ),
            Problem::Metric(mp) => (
                mp.d(),
                InstanceData::Metric {
                    u: mp.triples().iter().map(|t| t.u.clone()).collect(),
                    v: mp.triples().iter().map(|t| t.v.clone()).collect(),
                    s: mp.triples().iter().map(|t| t.s as i8).collect(),
                },
                mp.lipschitz,
                mp.radius,
            ),
        };
        InstanceFile {
            kind: p.kind(),
            d,
            m: part.points(),
            n: part.nodes(),
            seed: p.seed(),
            lipschitz,
            radius,
            data,
        }
    }

    pub fn into_problem(self) -> Result<Problem, ProblemError> {
        let problem = match (self.kind, self.data) {
            (ProblemKind::Quadmax, InstanceData::QuadMax { centers1, centers2 }) => {
                Problem::QuadMax(QuadMaxProblem::from_parts_unchecked(
                    self.d,
                    self.n,
                    self.seed,
                    centers1,
                    centers2,
                    self.lipschitz,
                    self.radius,
                )?)
            }
            (ProblemKind::Metric, InstanceData::Metric { u, v, s }) => {
                if u.len() != v.len() || u.len() != s.len() {
                    return Err(ProblemError::Instance("u, v and s differ in length".into()));
                }
                let triples = u
                    .into_iter()
                    .zip(v)
                    .zip(s)
                    .map(|((u, v), s)| Triple {
                        u,
                        v,
                        s: f64::from(s),
                    })
                    .collect();
                Problem::Metric(MetricProblem::from_parts_unchecked(
                    self.d,
                    self.n,
                    self.seed,
                    triples,
                    self.lipschitz,
                    self.radius,
                )?)
            }
            (kind, _) => {
                return Err(ProblemError::Instance(format!(
                    "data arrays do not match kind '{kind}'"
                )))
            }
        };
        if problem.partition().points() != self.m {
            return Err(ProblemError::Instance(format!(
                "header says m = {} but data holds {} points",
                self.m,
                problem.partition().points()
            )));
        }
        if !(self.lipschitz > 0.0 && self.radius > 0.0) {
            return Err(ProblemError::Instance(
                "lipschitz and radius must be positive".into(),
            ));
        }
        Ok(problem)
    }
}

impl Problem {
    pub fn to_instance_json(&self) -> String {
        let mut s =
            serde_json::to_string(&InstanceFile::from_problem(self)).expect("instance serialises");
        s.push('\n');
        s
    }

    pub fn from_instance_json(text: &str) -> Result<Problem, ProblemError> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| ProblemError::Instance(e.to_string()))?;
        file.into_problem()
    }
}
