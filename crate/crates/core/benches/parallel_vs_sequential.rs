use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use loggas::ensemble_sim::{sample_metropolis, sample_tridiagonal_extremes, EnsembleConfig};
use loggas::equilibrium::{solve_equilibrium, EquilibriumOptions, Potential};
use loggas::grid_numerics::build_grid;
use loggas::master_operator::forward_variance_q_with;
use loggas::test_functions::TestFunction;
use loggas::Parallelism;

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

fn forward_variance(c: &mut Criterion) {
    let eq = solve_equilibrium(&Potential::Gaussian, 1.0, &build_grid(12.0, 2048).unwrap(), &EquilibriumOptions::default())
        .unwrap();
    let phi = TestFunction::CompactBump { center: 0.2, radius: 2.5 }.on_grid(&eq.grid);
    let mut group = c.benchmark_group("forward_variance_q");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| forward_variance_q_with(&eq, phi.values(), mode))
        });
    }
    group.finish();
}

fn metropolis(c: &mut Criterion) {
    let mut group = c.benchmark_group("metropolis_n64");
    group.sample_size(10);
    for (name, mode) in MODES {
        let mut cfg = EnsembleConfig::metropolis(Potential::Gaussian, 1.0, 64, 200, 1);
        cfg.parallelism = mode;
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| sample_metropolis(&cfg).unwrap()));
    }
    group.finish();
}

fn tridiagonal_extremes(c: &mut Criterion) {
    let mut group = c.benchmark_group("tridiagonal_extremes_n1000");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sample_tridiagonal_extremes(1000, 1.0, 200, 3, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, forward_variance, metropolis, tridiagonal_extremes);
criterion_main!(benches);
