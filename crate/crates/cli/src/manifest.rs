//! Configuration loading, command-line overrides and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use ddsim::sim::Trace;
use ddsim::SimConfig;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Written next to every CSV. Passing it back as `--config` reproduces the
/// CSV exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Resolved configuration with every default expanded.
    pub config: Value,
    /// Keys set on the command line, applied over the file.
    pub overrides: Map<String, Value>,
    pub seeds: Seeds,
    pub outputs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub seed: u64,
    pub topology_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: String,
    pub values: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &SimConfig, overrides: &Map<String, Value>) -> Self {
        RunManifest {
            tool: "ddsim".into(),
            version: ddsim::VERSION.into(),
            command: command.into(),
            config: config.to_json(),
            overrides: overrides.clone(),
            seeds: Seeds {
                seed: config.seed,
                topology_seed: config.topology_seed,
            },
            outputs: Vec::new(),
            sweep: None,
            summary: None,
        }
    }

    pub fn with_trace(mut self, trace: &Trace) -> Self {
        let s = &trace.summary;
        self.summary = Some(serde_json::json!({
            "iterations": s.iterations,
            "virtual_time": s.virtual_time,
            "comm_rounds": s.comm_rounds,
            "final_avg_F": s.final_avg_f,
            "hit": s.hit,
            "f_star": s.f_star,
            "f_star_exact": s.f_star_exact,
            "lambda2": s.lambda2,
            "degree": s.degree,
            "step_a": s.step_a,
            "lipschitz": s.lipschitz,
            "radius": s.radius,
        }));
        self
    }

    pub fn save(&self, dir: &Path) -> Result<(), String> {
        let text = serde_json::to_string_pretty(self).expect("manifest serialises");
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// What a `--config` file contributed.
#[derive(Debug, Default)]
pub struct Loaded {
    pub map: Map<String, Value>,
    pub sweep: Option<SweepSpec>,
}

/// Reads a configuration file. A manifest is accepted too, in which case its
/// resolved configuration (and sweep set, if any) is used.
pub fn load_config(path: &Path) -> Result<Loaded, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let Value::Object(obj) = value else {
        return Err(format!("{}: expected a JSON object", path.display()));
    };
    if obj.contains_key("tool") && obj.contains_key("config") {
        let manifest: RunManifest = serde_json::from_value(Value::Object(obj))
            .map_err(|e| format!("{}: invalid manifest: {e}", path.display()))?;
        let Value::Object(map) = manifest.config else {
            return Err(format!(
                "{}: manifest config is not an object",
                path.display()
            ));
        };
        return Ok(Loaded {
            map,
            sweep: manifest.sweep,
        });
    }
    Ok(Loaded {
        map: obj,
        sweep: None,
    })
}

/// Parses `KEY=VALUE`; the value is JSON when it parses as such and a plain
/// string otherwise.
pub fn parse_param(s: &str) -> Result<(String, Value), String> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got '{s}'"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(format!("empty key in '{s}'"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

/// Applies `overrides` over `base`, key by key.
pub fn merge(mut base: Map<String, Value>, overrides: &Map<String, Value>) -> Map<String, Value> {
    for (k, v) in overrides {
        base.insert(k.clone(), v.clone());
    }
    base
}
