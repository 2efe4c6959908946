use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ddsim::sim::{run_prepared, Prepared};
use ddsim::{Exec, ProblemKind, Schedule, SimConfig};

fn config(n: usize, d: usize) -> SimConfig {
    let mut c = SimConfig::new(ProblemKind::Quadmax, d, 100 * n, n);
    c.seed = 1;
    c.schedule = Schedule::FixedPeriod(2);
    c.step_a = Some(0.3);
    c.max_iters = Some(20);
    c.record_every = 20;
    c
}

fn backends() -> Vec<Exec> {
    let mut v = vec![Exec::Sequential, Exec::best_available()];
    v.dedup();
    v
}

fn simulation_rounds(c: &mut Criterion) {
    let mut group = c.benchmark_group("20 rounds");
    group.sample_size(10);
    for (n, d) in [(4, 50), (16, 50), (16, 200)] {
        let cfg = config(n, d);
        let prep = Prepared::new(&cfg).expect("benchmark config is valid");
        for exec in backends() {
            group.bench_with_input(
                BenchmarkId::new(exec.name(), format!("n{n}_d{d}")),
                &exec,
                |b, &exec| b.iter(|| black_box(run_prepared(&cfg, &prep, exec).unwrap())),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, simulation_rounds);
criterion_main!(benches);
