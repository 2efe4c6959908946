use std::fmt;
use std::path::PathBuf;

use serde_json::{json, Map, Value};

use crate::dda::Schedule;
use crate::problems::ProblemKind;
use crate::topology::GraphKind;

/// Iterations used when a configuration names no stopping condition.
pub const DEFAULT_MAX_ITERS: u64 = 1000;

/// Points per node when `m` is not given.
pub const DEFAULT_POINTS_PER_NODE: usize = 50;

/// Flat run configuration.
///
/// The JSON form uses the field names below as keys. Parsing collects every
/// problem in one pass, see [`SimConfig::from_json`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub problem: ProblemKind,
    pub d: usize,
    pub m: usize,
    /// Serialized instance; when set, the problem kind, `d`, `m` and the
    /// partition come from the file.
    pub instance: Option<PathBuf>,
    pub n: usize,
    pub topology: GraphKind,
    /// Degree of the random regular graph (`expander` only).
    pub degree: Option<usize>,
    pub topology_seed: u64,
    pub schedule: Schedule,
    pub seed: u64,
    /// Step scale `A`; `None` picks the bound-minimising value.
    pub step_a: Option<f64>,
    pub step_q: f64,
    pub r: f64,
    pub max_iters: Option<u64>,
    /// Target accuracy above the reference optimum.
    pub epsilon: Option<f64>,
    /// Virtual-time budget; a round that would overrun it is not executed.
    pub time_budget: Option<f64>,
    pub record_every: u64,
    pub stop_at_target: bool,
    pub lipschitz: Option<f64>,
    pub radius: Option<f64>,
}

impl SimConfig {
    /// Synthetic problem of the given shape with every other key at its
    /// default.
    pub fn new(problem: ProblemKind, d: usize, m: usize, n: usize) -> Self {
        SimConfig {
            problem,
            d,
            m,
            instance: None,
            n,
            topology: GraphKind::Complete,
            degree: None,
            topology_seed: 0,
            schedule: Schedule::EveryRound,
            seed: 0,
            step_a: None,
            step_q: 0.5,
            r: 0.0,
            max_iters: Some(DEFAULT_MAX_ITERS),
            epsilon: None,
            time_budget: None,
            record_every: 1,
            stop_at_target: false,
            lipschitz: None,
            radius: None,
        }
    }

    /// Parses a flat JSON object. Unknown keys, wrong types and invalid
    /// values are all reported together.
    pub fn from_json(value: &Value) -> Result<Self, ConfigErrors> {
        let mut p = Parser { errors: Vec::new() };
        let Some(map) = value.as_object() else {
            return Err(ConfigErrors(vec![ConfigIssue::new(
                "<root>",
                "configuration must be a JSON object",
            )]));
        };
        for key in map.keys() {
            if !KEYS.contains(&key.as_str()) {
                p.error(key, "unknown key");
            }
        }

        let problem = p
            .string(map, "problem")
            .map(|s| {
                s.parse::<ProblemKind>()
                    .map_err(|e| p.error("problem", e))
                    .ok()
            })
            .unwrap_or(Some(ProblemKind::Quadmax));
        let d = p.uint(map, "d").unwrap_or(10) as usize;
        let n = match p.uint(map, "n") {
            Some(n) => n as usize,
            None => {
                if !map.contains_key("n") {
                    p.error("n", "required key is missing");
                }
                0
            }
        };
        let m = p
            .uint(map, "m")
            .map(|m| m as usize)
            .unwrap_or(DEFAULT_POINTS_PER_NODE * n.max(1));
        let instance = p.string(map, "instance").map(PathBuf::from);
        let topology = match p.string(map, "topology").as_deref() {
            None => Some(GraphKind::Complete),
            Some("complete") => Some(GraphKind::Complete),
            Some("expander") => Some(GraphKind::RegularExpander),
            Some("ring") => Some(GraphKind::Ring),
            Some(other) => {
                p.error(
                    "topology",
                    format!("unknown topology '{other}' (expected complete, expander or ring)"),
                );
                None
            }
        };
        let degree = p.uint(map, "degree").map(|k| k as usize);
        let seed = p.uint(map, "seed").unwrap_or(0);
        let topology_seed = p.uint(map, "topology_seed").unwrap_or(seed);
        let schedule = match p.string(map, "schedule") {
            None => Some(Schedule::EveryRound),
            Some(s) => s
                .parse::<Schedule>()
                .map_err(|e| p.error("schedule", e.to_string()))
                .ok(),
        };
        let step_a = match map.get("step_a") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) if s == "auto" => None,
            Some(_) => p.number(map, "step_a"),
        };
        let step_q = p.number(map, "step_q").unwrap_or(0.5);
        let r = p.number(map, "r").unwrap_or(0.0);
        let mut max_iters = p.uint(map, "max_iters");
        let epsilon = p.number(map, "epsilon");
        let time_budget = p.number(map, "time_budget");
        let record_every = p.uint(map, "record_every").unwrap_or(1);
        let stop_at_target = p
            .boolean(map, "stop_at_target")
            .unwrap_or(epsilon.is_some());
        let lipschitz = p.number(map, "lipschitz");
        let radius = p.number(map, "radius");

        let no_stop =
            max_iters.is_none() && time_budget.is_none() && !(epsilon.is_some() && stop_at_target);
        if no_stop && !map.contains_key("max_iters") && !map.contains_key("time_budget") {
            max_iters = Some(DEFAULT_MAX_ITERS);
        }

        let config = SimConfig {
            problem: problem.unwrap_or(ProblemKind::Quadmax),
            d,
            m,
            instance,
            n,
            topology: topology.unwrap_or(GraphKind::Complete),
            degree,
            topology_seed,
            schedule: schedule.unwrap_or(Schedule::EveryRound),
            seed,
            step_a,
            step_q,
            r,
            max_iters,
            epsilon,
            time_budget,
            record_every,
            stop_at_target,
            lipschitz,
            radius,
        };
        let mut errors = p.errors;
        if let Err(ConfigErrors(more)) = config.validate() {
            for issue in more {
                if !errors.iter().any(|e| e.key == issue.key) {
                    errors.push(issue);
                }
            }
        }
        if errors.is_empty() {
            Ok(config)
        } else {
            Err(ConfigErrors(errors))
        }
    }

    /// Checks value ranges and cross-field consistency.
    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut errors = Vec::new();
        let mut bad = |key: &str, msg: String| errors.push(ConfigIssue::new(key, msg));
        if self.n == 0 {
            bad("n", "must be at least 1".into());
        }
        if self.instance.is_none() {
            if self.d == 0 {
                bad("d", "must be at least 1".into());
            }
            if self.n > 0 && !self.m.is_multiple_of(self.n) {
                bad(
                    "m",
                    format!("{} nodes do not evenly divide {} points", self.n, self.m),
                );
            }
            if self.m == 0 {
                bad("m", "must be at least 1".into());
            }
        }
        match self.topology {
            GraphKind::RegularExpander => match self.degree {
                None => bad("degree", "required for the expander topology".into()),
                Some(k) if self.n > 0 && (k == 0 || k >= self.n || (self.n * k) % 2 == 1) => bad(
                    "degree",
                    format!("no connected {k}-regular graph on {} nodes", self.n),
                ),
                _ => {}
            },
            _ => {
                if self.degree.is_some() {
                    bad("degree", "only meaningful for the expander topology".into());
                }
            }
        }
        if let Err(e) = self.schedule.validate() {
            bad("schedule", e.to_string());
        }
        if let Some(a) = self.step_a {
            if !(a > 0.0 && a.is_finite()) {
                bad("step_a", format!("must be positive or \"auto\", got {a}"));
            }
        }
        if !(self.step_q > 0.0 && self.step_q < 1.0) {
            bad("step_q", format!("must lie in (0, 1), got {}", self.step_q));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            bad("r", format!("must be finite and >= 0, got {}", self.r));
        }
        if self.max_iters == Some(0) {
            bad("max_iters", "must be at least 1".into());
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                bad("epsilon", format!("must be positive, got {eps}"));
            }
        }
        if let Some(b) = self.time_budget {
            if !(b > 0.0 && b.is_finite()) {
                bad("time_budget", format!("must be positive, got {b}"));
            }
        }
        if self.stop_at_target && self.epsilon.is_none() {
            bad("stop_at_target", "needs epsilon".into());
        }
        if self.max_iters.is_none()
            && self.time_budget.is_none()
            && !(self.epsilon.is_some() && self.stop_at_target)
        {
            bad(
                "max_iters",
                "no stopping condition: set max_iters, time_budget or epsilon".into(),
            );
        }
        if self.record_every == 0 {
            bad("record_every", "must be at least 1".into());
        }
        for (key, v) in [("lipschitz", self.lipschitz), ("radius", self.radius)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    bad(key, format!("must be positive, got {v}"));
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(errors))
        }
    }

    /// Fully expanded JSON form; [`SimConfig::from_json`] reads it back to an
    /// equal value.
    pub fn to_json(&self) -> Value {
        let topology = match self.topology {
            GraphKind::Complete => "complete",
            GraphKind::RegularExpander => "expander",
            GraphKind::Ring => "ring",
        };
        json!({
            "problem": self.problem.to_string(),
            "d": self.d,
            "m": self.m,
            "instance": self.instance.as_ref().map(|p| p.display().to_string()),
            "n": self.n,
            "topology": topology,
            "degree": self.degree,
            "topology_seed": self.topology_seed,
            "schedule": self.schedule.to_string(),
            "seed": self.seed,
            "step_a": self.step_a.map_or(json!("auto"), |a| json!(a)),
            "step_q": self.step_q,
            "r": self.r,
            "max_iters": self.max_iters,
            "epsilon": self.epsilon,
            "time_budget": self.time_budget,
            "record_every": self.record_every,
            "stop_at_target": self.stop_at_target,
            "lipschitz": self.lipschitz,
            "radius": self.radius,
        })
    }
}

const KEYS: &[&str] = &[
    "problem",
    "d",
    "m",
    "instance",
    "n",
    "topology",
    "degree",
    "topology_seed",
    "schedule",
    "seed",
    "step_a",
    "step_q",
    "r",
    "max_iters",
    "epsilon",
    "time_budget",
    "record_every",
    "stop_at_target",
    "lipschitz",
    "radius",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigIssue {
            key: key.into(),
            message: message.into(),
        }
    }
}

/// Every problem found while reading a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl ConfigErrors {
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|i| i.key.as_str())
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{}: {}", issue.key, issue.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

struct Parser {
    errors: Vec<ConfigIssue>,
}

impl Parser {
    fn error(&mut self, key: &str, msg: impl Into<String>) {
        self.errors.push(ConfigIssue::new(key, msg));
    }

    fn get<'a>(map: &'a Map<String, Value>, key: &str) -> Option<&'a Value> {
        map.get(key).filter(|v| !v.is_null())
    }

    fn string(&mut self, map: &Map<String, Value>, key: &str) -> Option<String> {
        match Self::get(map, key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                self.error(key, format!("expected a string, got {other}"));
                None
            }
        }
    }

    fn uint(&mut self, map: &Map<String, Value>, key: &str) -> Option<u64> {
        let v = Self::get(map, key)?;
        match v.as_u64() {
            Some(u) => Some(u),
            None => {
                self.error(key, format!("expected a non-negative integer, got {v}"));
                None
            }
        }
    }

    fn number(&mut self, map: &Map<String, Value>, key: &str) -> Option<f64> {
        let v = Self::get(map, key)?;
        match v.as_f64() {
            Some(x) => Some(x),
            None => {
                self.error(key, format!("expected a number, got {v}"));
                None
            }
        }
    }

    fn boolean(&mut self, map: &Map<String, Value>, key: &str) -> Option<bool> {
        let v = Self::get(map, key)?;
        match v.as_bool() {
            Some(b) => Some(b),
            None => {
                self.error(key, format!("expected true or false, got {v}"));
                None
            }
        }
    }
}
