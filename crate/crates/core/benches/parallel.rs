//! Sequential vs rayon execution of the three data-parallel hot spots.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use vortex_core::clustering::{embed_2d, TsneParams};
use vortex_core::fields::{compute_criteria, AxisRoles, GridMeta, VelocityField};
use vortex_core::regions::{build_tree, extract_all_regions, CellGrid, SplitParams};
use vortex_core::synthetic::{tube_field, SwirlTube};
use vortex_core::thresholding::{expand_histogram, refine_histogram, ExpandParams, RefineParams};
use vortex_core::Execution;

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn tubes(n: usize) -> (GridMeta, VelocityField) {
    let meta = GridMeta::new([n; 3], [1.0; 3], [0.0; 3], AxisRoles::default()).unwrap();
    let m = (n - 1) as f64;
    let tubes = [
        SwirlTube::straight([2.0, 0.3 * m, 0.3 * m], [m - 2.0, 0.3 * m, 0.3 * m], 2.5, 20.0),
        SwirlTube::straight([0.7 * m, 2.0, 0.6 * m], [0.7 * m, m - 2.0, 0.6 * m], 2.0, -15.0),
        SwirlTube { centerline: vec![[0.2 * m, 0.7 * m, 2.0], [0.5 * m, 0.75 * m, 0.8 * m], [0.8 * m, 0.7 * m, 2.0]], core_radius: 2.0, circulation: 18.0 },
    ];
    let vel = tube_field(&meta, &tubes, Execution::Parallel);
    (meta, vel)
}

fn criteria(c: &mut Criterion) {
    let (meta, vel) = tubes(64);
    let mut group = c.benchmark_group("criteria_64");
    for exec in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| compute_criteria(black_box(&meta), black_box(&vel), exec).unwrap())
        });
    }
    group.finish();
}

fn tree(c: &mut Criterion) {
    let (meta, vel) = tubes(64);
    let fields = compute_criteria(&meta, &vel, Execution::Parallel).unwrap();
    let grid = CellGrid::lambda2(&fields, Execution::Parallel);
    let init = refine_histogram(&grid.values, &RefineParams::default(), Execution::Parallel).unwrap();
    let sched = expand_histogram(&grid.values, init.value, &ExpandParams::default(), Execution::Parallel).unwrap();
    let regions = extract_all_regions(&grid, init.value, 1e-4, Execution::Parallel);
    let params = SplitParams { vsf: 0.05, ..SplitParams::default() };
    let mut group = c.benchmark_group("tree_64");
    group.sample_size(10);
    for exec in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| build_tree(black_box(&grid), &regions, &sched.steps, &params, exec))
        });
    }
    group.finish();
}

fn tsne(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let rows: Vec<Vec<f64>> = (0..300).map(|i| (0..8).map(|d| if d == i % 4 { 8.0 } else { 0.0 } + noise.sample(&mut rng)).collect()).collect();
    let params = TsneParams { iterations: 300, ..TsneParams::default() };
    let mut group = c.benchmark_group("tsne_300");
    group.sample_size(10);
    for exec in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| embed_2d(black_box(&rows), &params, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, criteria, tree, tsne);
criterion_main!(benches);
