//! Right-hand side and full-step timings on the disk-advection setup.
//!
//! Each kernel runs on the default thread pool and on a one-thread pool. Build
//! with `--no-default-features` to time the sequential fallback instead.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cvflow::bench::ExperimentSpec;
use cvflow::timestepping::Solver;

const SIZES: [usize; 2] = [5_000, 20_000];

fn pools() -> Vec<(&'static str, Option<usize>)> {
    if cfg!(feature = "parallel") {
        vec![("pool", None), ("one-thread", Some(1))]
    } else {
        vec![("sequential", None)]
    }
}

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernels");
    group.sample_size(20);
    for cells in SIZES {
        let spec = ExperimentSpec::builtin("example2").unwrap().with_cells(cells);
        let mesh = spec.build_mesh().unwrap();
        let topo = spec.topography(&mesh);
        let policy = spec.boundary_policy(&mesh).unwrap();
        let init = spec.initial_state(&mesh, &topo).unwrap();
        let mut cfg = spec.scheme.clone();
        cfg.check_max_min = false;
        let mut solver = Solver::new(&mesh, topo, policy, cfg).unwrap();
        let mut prepared = init.clone();
        solver.prepare(&mut prepared).unwrap();

        for (label, threads) in pools() {
            group.bench_function(BenchmarkId::new(format!("rhs/{label}"), mesh.len()), |b| {
                cvflow::par::install(threads, || b.iter(|| black_box(solver.rhs(&prepared).unwrap()[0]))).unwrap()
            });
            group.bench_function(BenchmarkId::new(format!("step/{label}"), mesh.len()), |b| {
                cvflow::par::install(threads, || {
                    b.iter_batched_ref(
                        || prepared.clone(),
                        |st| black_box(solver.step(st, f64::INFINITY).unwrap()),
                        criterion::BatchSize::LargeInput,
                    )
                })
                .unwrap()
            });
        }
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
