//! Sequential versus rayon-parallel execution of a small experiment grid.
//!
//! Without the `parallel` feature both variants run on the calling thread.

use criterion::{criterion_group, criterion_main, Criterion};
use ncg_core::bench::{run_experiment, ExperimentConfig, GridCell, SolverKind};
use ncg_core::problems::Family;
use std::hint::black_box;

fn grid(jobs: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        Family::Repu,
        GridCell { n: 100, m: 20, p: 2.25 },
        vec![SolverKind::Alg2, SolverKind::Acrn],
        1e-4,
    );
    cfg.grid.push(GridCell { n: 100, m: 20, p: 2.5 });
    cfg.instances_per_cell = 8;
    cfg.jobs = jobs;
    cfg
}

fn experiment(c: &mut Criterion) {
    let mut group = c.benchmark_group("repu_grid");
    group.sample_size(10);
    for (label, jobs) in [("sequential", 1), ("parallel", 0)] {
        let cfg = grid(jobs);
        group.bench_function(label, |b| b.iter(|| black_box(run_experiment(&cfg).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, experiment);
criterion_main!(benches);
