mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ddsim::cost::{self, TradeoffParams};
use ddsim::problems::generate_synthetic;
use ddsim::sim::{self, presets, SweepResult};
use ddsim::{CostError, Exec, ProblemKind, Schedule, SimConfig, SimError};
use serde_json::{Map, Value};

use manifest::{load_config, merge, parse_param, RunManifest, SweepSpec};

/// Simulator and planner for distributed dual averaging.
#[derive(Debug, Parser)]
#[command(name = "ddsim", version, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and write its trace.
    Run(RunArgs),
    /// Time to target as a function of the number of processors.
    SweepN(SweepNArgs),
    /// Time to target for several communication schedules.
    SweepSchedule(SweepScheduleArgs),
    /// Print the closed-form tradeoff quantities for given costs.
    Plan(PlanArgs),
    /// Generate a synthetic instance file.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration or a manifest written by an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for the data and the topology.
    #[arg(long)]
    seed: Option<u64>,
    /// Communication-to-computation ratio.
    #[arg(long)]
    r: Option<f64>,
    /// Any other configuration key. VALUE is read as JSON when possible.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    params: Vec<(String, Value)>,
    /// Worker threads for the parallel back-end.
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Map<String, Value> {
        let mut m: Map<String, Value> = self.params.iter().cloned().collect();
        if let Some(seed) = self.seed {
            m.insert("seed".into(), seed.into());
            m.insert("topology_seed".into(), seed.into());
        }
        if let Some(r) = self.r {
            m.insert("r".into(), r.into());
        }
        m
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SweepNArgs {
    #[command(flatten)]
    common: Common,
    /// Processor counts, e.g. `1..14` or `2,4,8`. Ranges are inclusive.
    #[arg(long = "n", value_parser = parse_node_set)]
    nodes: Option<NodeSet>,
}

#[derive(Debug, Args)]
struct SweepScheduleArgs {
    #[command(flatten)]
    common: Common,
    /// Schedules, e.g. `h1,h2,p0.3,p1`.
    #[arg(long = "set")]
    schedules: Option<String>,
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[arg(long)]
    r: f64,
    /// Processors; defaults to the rounded optimum.
    #[arg(long)]
    n: Option<usize>,
    /// Messages per node per exchange; defaults to `n - 1`.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    lambda2: f64,
    #[arg(long, default_value_t = 1.0)]
    lipschitz: f64,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Power-law exponent to report.
    #[arg(long, default_value_t = 0.3)]
    p: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Quadmax,
    Metric,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 10)]
    d: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone)]
struct NodeSet(Vec<usize>);

fn parse_node_set(s: &str) -> Result<NodeSet, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| format!("'{x}' is not a processor count"))
        };
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty range '{part}'"));
            }
            out.extend(a..=b);
        } else {
            out.push(num(part)?);
        }
    }
    Ok(NodeSet(out))
}

fn parse_schedule_set(s: &str) -> Result<Vec<Schedule>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<Schedule>().map_err(|e| e.to_string()))
        .collect()
}

/// Failure carrying its exit status.
#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
    Partial(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
            Failure::Partial(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) | Failure::Partial(m) => m,
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let runtime = matches!(
            e,
            SimError::Dda(_) | SimError::Diverged { .. } | SimError::IterationCap(_)
        ) || matches!(
            e,
            SimError::Problem(ddsim::problems::ProblemError::Eigen(_))
        );
        if runtime {
            Failure::Runtime(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::SweepN(a) => cmd_sweep_n(a),
        Command::SweepSchedule(a) => cmd_sweep_schedule(a),
        Command::Plan(a) => cmd_plan(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))
}

fn resolve(base: Map<String, Value>, overrides: &Map<String, Value>) -> Result<SimConfig, Failure> {
    let merged = merge(base, overrides);
    SimConfig::from_json(&Value::Object(merged))
        .map_err(|e| Failure::Config(format!("invalid configuration:\n{e}")))
}

fn load(common: &Common) -> Result<manifest::Loaded, Failure> {
    match &common.config {
        Some(path) => load_config(path).map_err(Failure::Config),
        None => Ok(manifest::Loaded::default()),
    }
}

/// Writes `trace.csv` and its manifest into `dir`.
fn write_run(
    dir: &Path,
    config: &SimConfig,
    overrides: &Map<String, Value>,
    trace: &sim::Trace,
) -> Result<PathBuf, Failure> {
    create_dir(dir)?;
    let csv = dir.join("trace.csv");
    trace
        .save_csv(&csv)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", csv.display())))?;
    let mut m = RunManifest::new("run", config, overrides).with_trace(trace);
    m.outputs.push(csv.clone());
    m.save(dir).map_err(Failure::Runtime)?;
    Ok(csv)
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let overrides = a.common.overrides();
    let config = resolve(load(&a.common)?.map, &overrides)?;
    let trace = sim::run_with(&config, Exec::best_available(), a.common.workers)?;
    let csv = write_run(&a.common.out, &config, &overrides, &trace)?;
    let s = &trace.summary;
    println!(
        "{} iterations, virtual time {:.4}, {} exchanges, final avg_F {:.6}",
        s.iterations, s.virtual_time, s.comm_rounds, s.final_avg_f
    );
    match (s.target, s.hit) {
        (Some(_), Some(h)) => {
            println!("target reached at t = {} (time {:.4})", h.t, h.virtual_time)
        }
        (Some(_), None) => println!("target not reached"),
        _ => {}
    }
    println!("wrote {}", csv.display());
    Ok(())
}

/// Writes the sweep table, per-point traces and manifests. Returns the
/// number of failed points.
fn write_sweep(
    out: &Path,
    command: &str,
    base: &SimConfig,
    overrides: &Map<String, Value>,
    spec: SweepSpec,
    result: &SweepResult,
) -> Result<usize, Failure> {
    create_dir(out)?;
    let mut outputs = Vec::new();
    let mut failed = 0;
    for p in &result.points {
        match &p.outcome {
            Ok(trace) => {
                let dir = out.join("runs").join(&p.label);
                outputs.push(write_run(&dir, &p.config, overrides, trace)?);
            }
            Err(e) => {
                failed += 1;
                eprintln!("point {} failed: {e}", p.label);
            }
        }
    }
    let csv = out.join("sweep.csv");
    let file =
        fs::File::create(&csv).map_err(|e| Failure::Runtime(format!("{}: {e}", csv.display())))?;
    result
        .write_csv(file)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", csv.display())))?;
    outputs.insert(0, csv);
    let mut m = RunManifest::new(command, base, overrides);
    m.sweep = Some(spec);
    m.outputs = outputs;
    m.save(out).map_err(Failure::Runtime)?;
    Ok(failed)
}

fn print_points(result: &SweepResult) {
    println!(
        "{:>8} {:>10} {:>12} {:>8} {:>14}",
        "point", "iters", "time", "comm", "final avg_F"
    );
    for p in &result.points {
        let na = || "-".to_string();
        println!(
            "{:>8} {:>10} {:>12} {:>8} {:>14}",
            p.label,
            p.iters_to_target().map_or_else(na, |t| t.to_string()),
            p.time_to_target().map_or_else(na, |t| format!("{t:.4}")),
            p.comm_rounds().map_or_else(na, |c| c.to_string()),
            p.final_avg_f().map_or_else(na, |f| format!("{f:.6}")),
        );
    }
}

fn sweep_exit(failed: usize, total: usize) -> Result<(), Failure> {
    if failed > 0 {
        Err(Failure::Partial(format!(
            "{failed} of {total} sweep points failed"
        )))
    } else {
        Ok(())
    }
}

fn cmd_sweep_n(a: SweepNArgs) -> Result<(), Failure> {
    let overrides = a.common.overrides();
    let loaded = load(&a.common)?;
    let (mut base_map, default_set) = if a.common.config.is_some() {
        let set = loaded
            .sweep
            .filter(|s| s.axis == "n")
            .map(|s| s.values.join(","))
            .map(|s| parse_node_set(&s))
            .transpose()
            .map_err(Failure::Config)?
            .map(|s| s.0);
        (loaded.map, set)
    } else {
        let (c, set) = presets::node_sweep();
        (as_map(c.to_json()), Some(set))
    };
    let ns = a
        .nodes
        .map(|s| s.0)
        .or(default_set)
        .unwrap_or_else(|| (1..=14).collect());
    if !base_map.contains_key("n") && !overrides.contains_key("n") {
        base_map.insert("n".into(), ns.first().copied().unwrap_or(1).into());
    }
    let base = resolve(base_map, &overrides)?;
    let exec = Exec::best_available();
    let result = exec.with_workers(a.common.workers, || sim::sweep_n(&base, &ns, exec))?;
    let spec = SweepSpec {
        axis: "n".into(),
        values: ns.iter().map(|n| n.to_string()).collect(),
    };
    let failed = write_sweep(&a.common.out, "sweep-n", &base, &overrides, spec, &result)?;
    print_points(&result);
    if base.r > 0.0 {
        println!("predicted optimum 1/sqrt(r) = {:.2}", 1.0 / base.r.sqrt());
    }
    match result.argmin_time() {
        Some(p) => println!(
            "fastest to target: n = {} (time {:.4})",
            p.label,
            p.time_to_target().unwrap_or(f64::NAN)
        ),
        None => println!("no point reached the target"),
    }
    sweep_exit(failed, result.points.len())
}

fn cmd_sweep_schedule(a: SweepScheduleArgs) -> Result<(), Failure> {
    let overrides = a.common.overrides();
    let loaded = load(&a.common)?;
    let (base_map, default_set) = if a.common.config.is_some() {
        let set = loaded
            .sweep
            .filter(|s| s.axis == "schedule")
            .map(|s| s.values.join(","));
        (loaded.map, set)
    } else {
        let (c, set) = presets::schedule_sweep();
        let labels: Vec<String> = set.iter().map(|s| s.to_string()).collect();
        (as_map(c.to_json()), Some(labels.join(",")))
    };
    let text = a
        .schedules
        .or(default_set)
        .unwrap_or_else(|| "h1,h2,p0.3,p1".into());
    let set = parse_schedule_set(&text).map_err(|e| Failure::Config(format!("--set: {e}")))?;
    let base = resolve(base_map, &overrides)?;
    let exec = Exec::best_available();
    let result = exec.with_workers(a.common.workers, || sim::sweep_schedule(&base, &set, exec))?;
    let spec = SweepSpec {
        axis: "schedule".into(),
        values: set.iter().map(|s| s.to_string()).collect(),
    };
    let failed = write_sweep(
        &a.common.out,
        "sweep-schedule",
        &base,
        &overrides,
        spec,
        &result,
    )?;
    print_points(&result);
    let mut reached: Vec<(f64, &str)> = result
        .points
        .iter()
        .filter_map(|p| p.time_to_target().map(|t| (t, p.label.as_str())))
        .collect();
    reached.sort_by(|x, y| x.0.total_cmp(&y.0));
    let order: Vec<&str> = reached.iter().map(|r| r.1).collect();
    println!("ordering by time to target: {}", order.join(" < "));
    let missed: Vec<&str> = result
        .points
        .iter()
        .filter(|p| !p.converged())
        .map(|p| p.label.as_str())
        .collect();
    if !missed.is_empty() {
        println!("target not reached: {}", missed.join(", "));
    }
    sweep_exit(failed, result.points.len())
}

fn as_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn cost_failure(e: CostError) -> Failure {
    Failure::Config(e.to_string())
}

fn cmd_plan(a: PlanArgs) -> Result<(), Failure> {
    println!("r = {}", a.r);
    let optimum = match cost::n_opt(a.r) {
        Ok(v) => {
            println!("n_opt = 1/sqrt(r) = {v:.2}");
            Some(v)
        }
        Err(CostError::Unbounded) => {
            println!(
                "n_opt is unbounded: with r = 0 communication is free, so every added \
                 processor shortens the run"
            );
            None
        }
        Err(e) => return Err(cost_failure(e)),
    };
    let Some(n) = a.n.or_else(|| optimum.map(|v| (v.round() as usize).max(1))) else {
        println!("pass --n to get h_opt, the constants and predicted times");
        return Ok(());
    };
    let params = TradeoffParams {
        r: a.r,
        n,
        k: a.k.unwrap_or(n.saturating_sub(1)),
        lambda2: a.lambda2,
        lipschitz: a.lipschitz,
        radius: a.radius,
    };
    params.validate().map_err(cost_failure)?;
    let p = Schedule::PowerLaw(a.p);
    p.validate()
        .map_err(|e| Failure::Config(format!("--p: {e}")))?;
    println!(
        "n = {}, k = {}, lambda2 = {}, L = {}, R = {}",
        params.n, params.k, params.lambda2, params.lipschitz, params.radius
    );
    let h = cost::h_opt_period(&params);
    println!("h_opt = {:.4} (period {h})", cost::h_opt(&params));
    let (l, rad, lam) = (params.lipschitz, params.radius, params.lambda2);
    println!("C_1 = {:.4}", cost::constant_c1(l, rad, lam));
    println!("C_h = {:.4} (h = {h})", cost::constant_ch(l, rad, lam, h));
    println!(
        "C_p = {:.4} (p = {})",
        cost::constant_cp(l, rad, lam, a.p),
        a.p
    );
    println!("predicted time to epsilon = {}:", a.epsilon);
    for regime in [Schedule::EveryRound, Schedule::FixedPeriod(h), p] {
        let regime_label = regime.to_string();
        match cost::tau_epsilon(a.epsilon, &params, regime) {
            Ok(t) => println!("  {regime_label:>8}  {t:.6e}"),
            Err(CostError::DivergentExponent(_)) => {
                println!("  {regime_label:>8}  diverges (p >= 1/2)")
            }
            Err(e) => return Err(cost_failure(e)),
        }
    }
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let kind = match a.kind {
        Kind::Quadmax => ProblemKind::Quadmax,
        Kind::Metric => ProblemKind::Metric,
    };
    let problem = generate_synthetic(kind, a.d, a.m, a.n, a.seed)
        .map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    fs::write(&a.out, problem.to_instance_json())
        .map_err(|e| Failure::Runtime(format!("{}: {e}", a.out.display())))?;
    println!(
        "wrote {} instance with d = {}, m = {}, n = {} to {}",
        kind,
        a.d,
        a.m,
        a.n,
        a.out.display()
    );
    Ok(())
}
