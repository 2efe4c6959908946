//! Acceptance criteria 1 to 10. Each prints one PASS or FAIL line with the
//! measured quantities; the binary exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ddsim::cost::{self, TradeoffParams};
use ddsim::dda::{closed_form_z, consensus_update, local_update};
use ddsim::linalg::{dot, symmetric_eigen};
use ddsim::problems::{generate_synthetic, psd_project};
use ddsim::sim::{presets, run_with, sweep_n, sweep_schedule};
use ddsim::topology::{
    complete_graph, metropolis_matrix, mixing_l1_distance, random_regular_graph, ring,
    spectral_info,
};
use ddsim::{Exec, GraphKind, Objective, ProblemKind, Schedule, SimConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Outcome;

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn formula_fidelity() -> Outcome {
    let a = cost::n_opt(0.0293).unwrap();
    let b = cost::n_opt(0.005).unwrap();
    let r = cost::estimate_r(29.0, 0.85).unwrap();
    let pass = (a - 5.84).abs() <= 0.01 && (b - 14.14).abs() <= 0.01 && (r - 0.0293).abs() <= 1e-4;
    outcome(
        pass,
        format!("n_opt(0.0293) = {a:.4}, n_opt(0.005) = {b:.4}, estimate_r(29, 0.85) = {r:.5}"),
    )
}

fn h_opt_cross_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0i64;
    let mut misses = Vec::new();
    for _ in 0..50 {
        let n = rng.random_range(2..=100usize);
        let k = rng.random_range(1..n);
        let r = 10f64.powf(rng.random_range(-4.0..0.0));
        let lambda2 = rng.random_range(0.0..0.99);
        let params = TradeoffParams {
            r,
            n,
            k,
            lambda2,
            lipschitz: 1.0,
            radius: 1.0,
        };
        let objective = |h: u64| {
            cost::constant_ch(1.0, 1.0, lambda2, h).powi(2)
                * (1.0 / n as f64 + k as f64 * r / h as f64)
        };
        let best = (1..=1000u64)
            .min_by(|&a, &b| objective(a).total_cmp(&objective(b)))
            .unwrap();
        let predicted = cost::h_opt_period(&params);
        let diff = (best as i64 - predicted as i64).abs();
        worst = worst.max(diff);
        if diff > 1 {
            misses.push(format!(
                "(n={n}, k={k}, r={r:.2e}, l2={lambda2:.2}): {best} vs {predicted}"
            ));
        }
    }
    outcome(
        misses.is_empty(),
        format!(
            "50 tuples, largest |argmin - h_opt| = {worst}{}",
            if misses.is_empty() {
                String::new()
            } else {
                format!("; {}", misses.join("; "))
            }
        ),
    )
}

fn closed_form_oracle() -> Outcome {
    let d = 3;
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=5 {
        let graph = if n == 2 { complete_graph(2) } else { ring(n) }.unwrap();
        let p = metropolis_matrix(&graph).unwrap();
        for h in 1..=3u64 {
            let history: Vec<Vec<Vec<f64>>> = (0..20)
                .map(|_| {
                    (0..n)
                        .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
                        .collect()
                })
                .collect();
            let mut z = vec![vec![0.0; d]; n];
            for t in 1..=20u64 {
                let g = &history[(t - 1) as usize];
                z = if t % h == 0 {
                    consensus_update(&p, &z, g, Exec::Sequential).unwrap()
                } else {
                    (0..n)
                        .map(|i| local_update(&z[i], &g[i]).unwrap())
                        .collect()
                };
                for (i, zi) in z.iter().enumerate() {
                    let cf = closed_form_z(&history, &p, h, t, i).unwrap();
                    for (a, b) in cf.iter().zip(zi) {
                        worst = worst.max((a - b).abs());
                    }
                }
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("n 2..5 x h 1..3 x T <= 20, max coordinate difference {worst:.2e}"),
    )
}

fn mixing_bound() -> Outcome {
    let graphs = [
        ("ring(8)", ring(8).unwrap()),
        ("complete(8)", complete_graph(8).unwrap()),
        (
            "random_regular(16, 4, 7)",
            random_regular_graph(16, 4, 7).unwrap(),
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, g) in &graphs {
        let p = metropolis_matrix(g).unwrap();
        let lambda2 = spectral_info(&p).unwrap().lambda2.max(0.0);
        let n = g.n() as f64;
        let mut slack = f64::INFINITY;
        for t in 0..=50u32 {
            let bound = n.sqrt() * lambda2.sqrt().powi(t as i32);
            for i in 0..g.n() {
                let dist = mixing_l1_distance(&p, t, i).unwrap();
                slack = slack.min(bound + 1e-9 - dist);
            }
        }
        pass &= slack >= 0.0;
        parts.push(format!(
            "{name}: lambda2 = {lambda2:.4}, min slack {slack:.2e}"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn processor_sweep() -> Outcome {
    let (base, ns) = presets::node_sweep();
    let result = sweep_n(&base, &ns, Exec::best_available()).unwrap();
    let times: Vec<String> = result
        .points
        .iter()
        .map(|p| {
            p.time_to_target().map_or(format!("{}: -", p.label), |t| {
                format!("{}: {t:.1}", p.label)
            })
        })
        .collect();
    let best = result.argmin_time().map(|p| p.label.clone());
    let pass = matches!(best.as_deref(), Some("5" | "6" | "7"));
    outcome(
        pass,
        format!(
            "argmin n = {}, times to target [{}]",
            best.unwrap_or_else(|| "none".into()),
            times.join(", ")
        ),
    )
}

fn schedule_sweep() -> Outcome {
    let (base, set) = presets::schedule_sweep();
    let result = sweep_schedule(&base, &set, Exec::best_available()).unwrap();
    let point = |label: &str| result.point(label).expect("schedule in preset");
    let (h1, h2, p03, p1) = (point("h1"), point("h2"), point("p0.3"), point("p1"));
    let time = |p: &ddsim::sim::SweepPoint| p.time_to_target().unwrap_or(f64::INFINITY);
    let comm = |p: &ddsim::sim::SweepPoint| p.comm_rounds().unwrap_or(0) as f64;

    let beats_h2 = time(p03) <= time(h2);
    let near_h1 = time(p03) <= 1.2 * time(h1);
    let comm_gap = (comm(p03) - comm(h2)).abs() / comm(h2);
    let comm_close = comm_gap <= 0.15;
    let p1_fails = !p1.converged();
    let fmt = |p: &ddsim::sim::SweepPoint| {
        p.time_to_target()
            .map_or("not reached".to_string(), |t| format!("{t:.3}"))
    };
    outcome(
        beats_h2 && near_h1 && comm_close && p1_fails,
        format!(
            "time to target h1 {}, h2 {}, p0.3 {}, p1 {}; p0.3 <= h2: {beats_h2}; \
             p0.3 <= 1.2 h1: {near_h1}; comm p0.3/h2 = {}/{} ({:.1}%): {comm_close}; \
             p1 misses target: {p1_fails}",
            fmt(h1),
            fmt(h2),
            fmt(p03),
            fmt(p1),
            comm(p03),
            comm(h2),
            100.0 * comm_gap
        ),
    )
}

fn constant_ordering() -> Outcome {
    let mut worst = f64::INFINITY;
    for lambda2 in [0.0, 0.5, 0.9] {
        let c1 = cost::constant_c1(1.0, 1.0, lambda2);
        for p in [0.1, 0.2, 0.3, 0.4] {
            worst = worst.min(c1 - cost::constant_cp(1.0, 1.0, lambda2, p));
        }
    }
    outcome(
        worst > 0.0,
        format!("min C_1 - C_p over the grid = {worst:.4}"),
    )
}

fn convexity_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut min_slack = f64::INFINITY;
    for kind in [ProblemKind::Quadmax, ProblemKind::Metric] {
        let problem = generate_synthetic(kind, 4, 80, 4, 3).unwrap();
        let dim = problem.dim();
        for pair in 0..1000 {
            let mut point =
                || -> Vec<f64> { (0..dim).map(|_| rng.random_range(-4.0..4.0)).collect() };
            let (x, y) = (point(), point());
            let node = pair % 4;
            let g = problem.subgradient(node, &x);
            let diff: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            let slack =
                problem.eval_local(node, &y) - problem.eval_local(node, &x) - dot(&g, &diff);
            min_slack = min_slack.min(slack);
        }
    }

    let d = 5;
    let mut worst_idem: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut min_b = f64::INFINITY;
    for _ in 0..200 {
        let x: Vec<f64> = (0..d * d + 1)
            .map(|_| rng.random_range(-3.0..3.0))
            .collect();
        let once = psd_project(&x, d).unwrap();
        let twice = psd_project(&once, d).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            worst_idem = worst_idem.max((a - b).abs());
        }
        let (values, _) = symmetric_eigen(d, &once[..d * d]).unwrap();
        min_eig = min_eig.min(*values.last().unwrap());
        min_b = min_b.min(once[d * d]);
    }

    let mut worst_stochastic: f64 = 0.0;
    for n in [2, 5, 8, 13, 16] {
        let mut graphs = vec![complete_graph(n).unwrap()];
        if n >= 3 {
            graphs.push(ring(n).unwrap());
        }
        if n >= 8 {
            // Small regular graphs can exhaust the retry budget for a given seed.
            graphs.extend((0..50).find_map(|seed| random_regular_graph(n, 4, seed).ok()));
        }
        for g in graphs {
            let (r, c) = metropolis_matrix(&g).unwrap().stochastic_deviation();
            worst_stochastic = worst_stochastic.max(r.max(c));
        }
    }

    let pass = min_slack >= -1e-9
        && worst_idem <= 1e-10
        && min_eig >= -1e-10
        && min_b >= 1.0
        && worst_stochastic <= 1e-12;
    outcome(
        pass,
        format!(
            "first-order slack min {min_slack:.2e} (2 x 1000 pairs); projection idempotence \
             {worst_idem:.1e}, min eigenvalue {min_eig:.1e}; stochastic deviation \
             {worst_stochastic:.1e}"
        ),
    )
}

fn determinism() -> Outcome {
    let mut configs = Vec::new();
    let mut q = SimConfig::new(ProblemKind::Quadmax, 10, 160, 8);
    q.topology = GraphKind::RegularExpander;
    q.degree = Some(3);
    q.schedule = Schedule::PowerLaw(0.3);
    q.seed = 21;
    q.max_iters = Some(1500);
    q.r = 0.01;
    configs.push(q);
    let mut m = SimConfig::new(ProblemKind::Metric, 4, 120, 6);
    m.topology = GraphKind::Ring;
    m.schedule = Schedule::FixedPeriod(2);
    m.seed = 22;
    m.max_iters = Some(600);
    configs.push(m);

    let mut pass = true;
    let mut rows = 0;
    for c in &configs {
        let reference = run_with(c, Exec::Sequential, None).unwrap().to_csv();
        rows += reference.lines().count() - 1;
        for workers in [1, 4] {
            let other = run_with(c, Exec::best_available(), Some(workers))
                .unwrap()
                .to_csv();
            pass &= other == reference;
        }
    }
    outcome(
        pass,
        format!(
            "{rows} trace rows compared across sequential, {} x 1 worker and x 4 workers",
            Exec::best_available().name()
        ),
    )
}

fn power_law_sandwich() -> Outcome {
    let mut violations = Vec::new();
    let mut corrected_ok = true;
    for p in [0.1, 0.3, 0.5, 1.0] {
        let s = Schedule::PowerLaw(p);
        let rounds: Vec<u64> = s.comm_rounds().take_while(|&c| c <= 10_000).collect();
        let mut h = 0usize;
        let mut count = 0;
        let mut first = None;
        for t in 1..=10_000u64 {
            while h < rounds.len() && rounds[h] <= t {
                h += 1;
            }
            let (hf, tf, e) = (h as f64, t as f64, p + 1.0);
            let lower = e * tf >= hf.powf(e) - 1.0;
            let upper = e * tf <= (hf + 1.0).powf(e) + p;
            if !(lower && upper) {
                count += 1;
                first.get_or_insert((t, h));
            }
            corrected_ok &= hf.powf(e) <= e * tf && e * tf < (hf + 2.0).powf(e) - 1.0;
        }
        if let Some((t, h)) = first {
            violations.push(format!(
                "p = {p}: {count} values of T, first T = {t} (H_T = {h})"
            ));
        }
    }
    let detail = if violations.is_empty() {
        "both sides hold for all T <= 1e4".to_string()
    } else {
        format!(
            "upper side (p+1)T <= (H_T+1)^(p+1) + p violated: {}; \
             H^(p+1) <= (p+1)T < (H+2)^(p+1) - 1 holds everywhere: {corrected_ok}",
            violations.join("; ")
        )
    };
    outcome(violations.is_empty(), detail)
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("formula fidelity", formula_fidelity),
        ("h_opt cross-check", h_opt_cross_check),
        ("closed-form accumulator", closed_form_oracle),
        ("mixing bound", mixing_bound),
        ("processor-count sweep", processor_sweep),
        ("schedule comparison", schedule_sweep),
        ("constant ordering", constant_ordering),
        ("convexity and projections", convexity_suite),
        ("determinism", determinism),
        ("exchange-count sandwich", power_law_sandwich),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let secs = start.elapsed().as_secs_f64();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {status} {name} [{secs:.2}s]: {}",
            i + 1,
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
