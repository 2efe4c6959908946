use super::trace::{Hit, RunSummary, Trace, TraceRow};
use super::{SimConfig, SimError};
use crate::cost;
use crate::dda::{
    self, consensus_update, local_update, network_error, proximal_step, running_average, StepSize,
};
use crate::exec::Exec;
use crate::linalg;
use crate::problems::reference::{self, DEFAULT_GAP_TOL};
use crate::problems::{generate_synthetic, Objective, Problem};
use crate::topology::{
    complete_graph, metropolis_matrix, random_regular_graph, ring, spectral_info, ConsensusMatrix,
    Graph, GraphKind, SpectralInfo,
};

/// Iterations of the subgradient run that stands in for `F*` when no exact
/// solver exists.
pub const APPROX_REFERENCE_ITERS: u64 = 20_000;

/// Hard cap for runs stopped by accuracy alone.
pub const ITERATION_CAP: u64 = 50_000_000;

/// Reference optimum and whether it is certified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceValue {
    pub f_star: f64,
    pub exact: bool,
}

/// Loads or generates the problem and applies the `L`/`R` overrides.
pub fn build_problem(config: &SimConfig) -> Result<Problem, SimError> {
    let mut problem = match &config.instance {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| SimError::Io(format!("reading instance {}: {e}", path.display())))?;
            let p = Problem::from_instance_json(&text)?;
            if p.nodes() != config.n {
                return Err(SimError::Mismatch(format!(
                    "instance is partitioned over {} nodes but n = {}",
                    p.nodes(),
                    config.n
                )));
            }
            p
        }
        None => generate_synthetic(config.problem, config.d, config.m, config.n, config.seed)?,
    };
    if let Some(l) = config.lipschitz {
        problem.set_lipschitz(l);
    }
    if let Some(r) = config.radius {
        problem.set_radius(r);
    }
    Ok(problem)
}

pub fn build_graph(config: &SimConfig) -> Result<Graph, SimError> {
    Ok(match config.topology {
        GraphKind::Complete => complete_graph(config.n)?,
        GraphKind::Ring => ring(config.n)?,
        GraphKind::RegularExpander => {
            let k = config
                .degree
                .ok_or_else(|| SimError::Mismatch("expander topology needs a degree".into()))?;
            random_regular_graph(config.n, k, config.topology_seed)?
        }
    })
}

/// `F*` for the stopping rule: exact for max-of-quadratics, the best value
/// of a long subgradient run otherwise.
pub fn reference_value(problem: &Problem) -> ReferenceValue {
    match problem {
        Problem::QuadMax(q) => ReferenceValue {
            f_star: reference::solve_quadmax(q, DEFAULT_GAP_TOL).f_star,
            exact: true,
        },
        Problem::Metric(_) => ReferenceValue {
            f_star: reference::subgradient_minimize(problem, APPROX_REFERENCE_ITERS, None).value,
            exact: false,
        },
    }
}

/// Everything a run needs besides the configuration, resolved once.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub problem: Problem,
    pub graph: Graph,
    pub matrix: ConsensusMatrix,
    pub spectrum: SpectralInfo,
    pub reference: Option<ReferenceValue>,
}

impl Prepared {
    pub fn new(config: &SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let problem = build_problem(config)?;
        let graph = build_graph(config)?;
        let matrix = metropolis_matrix(&graph)?;
        let spectrum = spectral_info(&matrix)?;
        let reference = config.epsilon.map(|_| reference_value(&problem));
        Ok(Prepared {
            problem,
            graph,
            matrix,
            spectrum,
            reference,
        })
    }
}

/// Runs with the parallel back-end when available, on the global pool.
pub fn run(config: &SimConfig) -> Result<Trace, SimError> {
    run_with(config, Exec::best_available(), None)
}

/// Runs with an explicit back-end and, for the parallel one, a dedicated
/// pool of `workers` threads. Output does not depend on either choice.
pub fn run_with(config: &SimConfig, exec: Exec, workers: Option<usize>) -> Result<Trace, SimError> {
    exec.with_workers(workers, || {
        let prepared = Prepared::new(config)?;
        run_prepared(config, &prepared, exec)
    })
}

pub fn run_prepared(config: &SimConfig, prep: &Prepared, exec: Exec) -> Result<Trace, SimError> {
    let problem = &prep.problem;
    let n = config.n;
    if problem.nodes() != n || prep.matrix.n() != n {
        return Err(SimError::Mismatch(format!(
            "problem has {} nodes, topology {}, config {n}",
            problem.nodes(),
            prep.matrix.n()
        )));
    }
    let k = prep.graph.max_degree();
    let lambda2 = prep.spectrum.lambda2.max(0.0);
    let step = match config.step_a {
        Some(a) => StepSize::new(a, config.step_q)?,
        None => {
            let auto = dda::optimal_step_a(
                config.schedule,
                problem.lipschitz(),
                problem.radius(),
                lambda2,
            )?;
            StepSize::new(auto.scale, config.step_q)?
        }
    };
    let target = match (config.epsilon, prep.reference) {
        (Some(eps), Some(r)) => Some(r.f_star + eps),
        (Some(_), None) => {
            return Err(SimError::Mismatch(
                "epsilon set but no reference value prepared".into(),
            ))
        }
        _ => None,
    };
    let max_iters = match config.max_iters {
        Some(t) => t,
        None if config.time_budget.is_some() => u64::MAX,
        None => ITERATION_CAP,
    };

    let start = problem.project(&vec![0.0; problem.dim()]);
    let mut z = vec![vec![0.0; problem.dim()]; n];
    let mut x = vec![start.clone(); n];
    let mut x_hat = x.clone();

    let mut comm_iter = config.schedule.comm_rounds();
    let mut next_comm = comm_iter.next().unwrap_or(u64::MAX);
    let mut comm_rounds = 0u64;
    let mut max_subgrad_norm: f64 = 0.0;
    let mut virtual_time = 0.0;
    let mut hit = None;
    let mut rows = Vec::new();
    let mut last_avg = f64::NAN;
    let mut t = 0u64;

    let evaluate = |x_hat: &[Vec<f64>]| -> (f64, f64) {
        let values = exec.map(n, |i| problem.eval_global(&x_hat[i]));
        let avg = values.iter().sum::<f64>() / n as f64;
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (avg, max)
    };

    while t < max_iters {
        let round = t + 1;
        let comm = round == next_comm;
        let comm_after = comm_rounds + u64::from(comm);
        let time_after = cost::breakdown(round, comm_after, n, k, config.r).total;
        if let Some(budget) = config.time_budget {
            if time_after > budget {
                break;
            }
        }
        t = round;

        let g = exec.map(n, |i| problem.subgradient(i, &x[i]));
        for gi in &g {
            max_subgrad_norm = max_subgrad_norm.max(linalg::norm(gi));
        }
        z = if comm {
            next_comm = comm_iter.next().unwrap_or(u64::MAX);
            consensus_update(&prep.matrix, &z, &g, exec)?
        } else {
            let zs = exec.map(n, |i| local_update(&z[i], &g[i]));
            zs.into_iter().collect::<Result<_, _>>()?
        };
        comm_rounds = comm_after;
        virtual_time = time_after;

        let a = step.at(t);
        x = exec.map(n, |i| proximal_step(&z[i], a, problem));
        if x.iter()
            .flatten()
            .chain(z.iter().flatten())
            .any(|v| !v.is_finite())
        {
            return Err(SimError::Diverged { round: t });
        }
        x_hat = exec.map(n, |i| running_average(&x_hat[i], &x[i], t));

        let record = t.is_multiple_of(config.record_every);
        let values = if record || target.is_some() {
            Some(evaluate(&x_hat))
        } else {
            None
        };
        let mut stop = false;
        if let (Some(target), Some((avg, _))) = (target, values) {
            if hit.is_none() && avg <= target {
                hit = Some(Hit { t, virtual_time });
                stop = config.stop_at_target;
            }
        }
        if let Some((avg, max)) = values {
            last_avg = avg;
            if record || stop {
                rows.push(TraceRow {
                    t,
                    virtual_time,
                    avg_f: avg,
                    max_f: max,
                    max_net_err: network_error(&z).max,
                    comm_rounds,
                    max_subgrad_norm,
                });
            }
        }
        if stop {
            break;
        }
    }

    if hit.is_none() && config.max_iters.is_none() && config.time_budget.is_none() {
        return Err(SimError::IterationCap(ITERATION_CAP));
    }
    if rows.last().map(|r| r.t) != Some(t) {
        let (avg, max) = evaluate(&x_hat);
        last_avg = avg;
        rows.push(TraceRow {
            t,
            virtual_time,
            avg_f: avg,
            max_f: max,
            max_net_err: network_error(&z).max,
            comm_rounds,
            max_subgrad_norm,
        });
    }

    Ok(Trace {
        rows,
        summary: RunSummary {
            iterations: t,
            virtual_time,
            comm_rounds,
            final_avg_f: last_avg,
            hit,
            f_star: prep.reference.map(|r| r.f_star),
            f_star_exact: prep.reference.is_some_and(|r| r.exact),
            target,
            lambda2: prep.spectrum.lambda2,
            degree: k,
            step_a: step.scale,
            step_q: step.exponent,
            lipschitz: problem.lipschitz(),
            radius: problem.radius(),
        },
    })
}
