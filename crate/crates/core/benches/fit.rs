//! Parallel vs sequential throughput of the fitter and the grid oracle.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cylfit::oracle::grid_best_axis_with;
use cylfit::{fit_cylinder, generate_cylinder_cloud, FitConfig, GeneratorSpec, Vec3};
use std::hint::black_box;

fn cloud(n: usize) -> cylfit::PointCloud {
    generate_cylinder_cloud(&GeneratorSpec {
        n,
        axis_point: Vec3::new(0.5, -1.0, 2.0),
        axis_dir: Vec3::new(0.2, 0.7, 1.0),
        radius: 1.5,
        height: 4.0,
        noise_sigma: 0.01,
        seed: 42,
    })
    .unwrap()
}

fn bench_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_cylinder");
    for n in [200, 20_000] {
        let pts = cloud(n);
        for (label, parallel) in [("sequential", false), ("parallel", true)] {
            let cfg = FitConfig {
                grid_count: 20_000,
                multistart_count: 16,
                parallel,
                ..FitConfig::default()
            };
            group.bench_with_input(BenchmarkId::new(label, n), &pts, |b, pts| {
                b.iter(|| fit_cylinder(black_box(pts), &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid_oracle");
    group.sample_size(20);
    let pts = cloud(500);
    for (label, parallel) in [("sequential", false), ("parallel", true)] {
        group.bench_function(label, |b| {
            b.iter(|| grid_best_axis_with(black_box(&pts), 10_000, parallel).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_fit, bench_oracle);
criterion_main!(benches);
