//! Kernel timings on the default rayon pool and on a single-thread pool.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;

use mmfs_core::grid::TorusGrid;
use mmfs_core::harness::{trial_rng, FunctionFamily, WeightFamily};
use mmfs_core::maximal::hl_maximal;
use mmfs_core::operators::{carleson, walsh_carleson};
use mmfs_core::oscillation::{sparse_decompose, DecompositionConfig};

fn kernels(c: &mut Criterion) {
    let single = ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for levels in [10u32, 12] {
        let grid = TorusGrid::new(levels).unwrap();
        let mut rng = trial_rng(0, 0);
        let w = WeightFamily::standard()[0].generate(grid, &mut rng).unwrap();
        let f = FunctionFamily::generate_any(grid, &mut rng).unwrap().1;
        let cfg = DecompositionConfig::default();
        for (pool, name) in [(None, "rayon"), (Some(&single), "1-thread")] {
            let run = |work: &mut (dyn FnMut() + Send)| match pool {
                Some(p) => p.install(work),
                None => work(),
            };
            group.bench_with_input(BenchmarkId::new(format!("hl_maximal/{name}"), levels), &w, |b, w| {
                b.iter(|| run(&mut || {
                    black_box(hl_maximal(w));
                }))
            });
            group.bench_with_input(BenchmarkId::new(format!("carleson/{name}"), levels), &f, |b, f| {
                b.iter(|| run(&mut || {
                    black_box(carleson(f).unwrap());
                }))
            });
            group.bench_with_input(BenchmarkId::new(format!("walsh_carleson/{name}"), levels), &f, |b, f| {
                b.iter(|| run(&mut || {
                    black_box(walsh_carleson(f).unwrap());
                }))
            });
            group.bench_with_input(BenchmarkId::new(format!("sparse_decompose/{name}"), levels), &f, |b, f| {
                b.iter(|| run(&mut || {
                    black_box(sparse_decompose(f, grid.root(), &cfg).unwrap());
                }))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
