use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use widthlab_core::bodies::{induced_ball, linear_image, Body};
use widthlab_core::linalg::Matrix;
use widthlab_core::ortho::trig_system;
use widthlab_core::parallel::Execution;
use widthlab_core::stochastic::{expectation_norm_with, mc_volume_ratio_with};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn expectation(c: &mut Criterion) {
    let body = induced_ball(trig_system(2), 4.0).unwrap();
    let mut group = c.benchmark_group("expectation_norm");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| expectation_norm_with(&body, 50_000, 7, exec).unwrap())
        });
    }
    group.finish();
}

fn volume(c: &mut Criterion) {
    let body = linear_image(&Body::euclidean(3), &Matrix::diag(&[2.0, 1.0, 0.5])).unwrap();
    let reference = Body::euclidean(3);
    let mut group = c.benchmark_group("mc_volume_ratio");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| mc_volume_ratio_with(&body, &reference, 200_000, 7, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, expectation, volume);
criterion_main!(benches);
