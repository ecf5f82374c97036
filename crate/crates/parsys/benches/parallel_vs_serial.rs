//! Rayon vs sequential comparison for the data-parallel kernels: operator
//! application, the implicit step, the Hölder pair scan and hypothesis
//! sampling.
//!
//! Run with `cargo bench -p parsys`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use parsys::data::{random_smooth, SmoothFieldSpec};
use parsys::evolve::{step, DiscreteOperator, SolverConfig};
use parsys::exec;
use parsys::grid::{holder_seminorm, UniformGrid, HOLDER_PAIR_CAP};
use parsys::operator::{row_sum_bound, SamplingSpec};
use parsys::preset::load_preset;

fn modes() -> [(&'static str, bool); 2] {
    [("parallel", false), ("serial", true)]
}

fn bench_apply_operator(c: &mut Criterion) {
    let preset = load_preset("example1-d2m2").unwrap();
    let grid = UniformGrid::new(preset.domain, 101).unwrap();
    let u = random_smooth(grid, 2, &SmoothFieldSpec::default(), 1);
    let disc = DiscreteOperator::assemble(&preset.operator, 0.0, grid);
    let flat = u.to_point_major();
    let mut out = vec![0.0; flat.len()];
    let mut group = c.benchmark_group("apply_operator_2d");
    for (name, seq) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &seq, |b, &seq| {
            exec::force_sequential(seq);
            b.iter(|| disc.apply_shifted(1.0, -0.5, &flat, &mut out));
        });
    }
    group.finish();
    exec::force_sequential(false);
}

fn bench_implicit_step(c: &mut Criterion) {
    let preset = load_preset("example1-d2m2").unwrap();
    let grid = UniformGrid::new(preset.domain, 81).unwrap();
    let u = random_smooth(grid, 2, &SmoothFieldSpec::default(), 2);
    let cfg = SolverConfig::default().with_dt(2e-3);
    let mut group = c.benchmark_group("implicit_step_2d");
    group.sample_size(20);
    for (name, seq) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &seq, |b, &seq| {
            exec::force_sequential(seq);
            b.iter(|| step(&preset.operator, 0.0, 2e-3, &u, None, &cfg).unwrap());
        });
    }
    group.finish();
    exec::force_sequential(false);
}

fn bench_holder_seminorm(c: &mut Criterion) {
    let grid = UniformGrid::new(parsys::grid::BoxDomain::new(4.0, 2), 101).unwrap();
    let u = random_smooth(grid, 1, &SmoothFieldSpec::default(), 3);
    let mut group = c.benchmark_group("holder_seminorm_2d");
    group.sample_size(20);
    for (name, seq) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &seq, |b, &seq| {
            exec::force_sequential(seq);
            b.iter(|| holder_seminorm(&u, 0.5, HOLDER_PAIR_CAP));
        });
    }
    group.finish();
    exec::force_sequential(false);
}

fn bench_row_sum_sampling(c: &mut Criterion) {
    let preset = load_preset("example1-d2m2").unwrap();
    let aux = preset.operator.derive_auxiliary();
    let sampling = SamplingSpec {
        domain: preset.domain,
        points_per_axis: 41,
        time_samples: 5,
    };
    let mut group = c.benchmark_group("row_sum_bound_2d");
    group.sample_size(20);
    for (name, seq) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &seq, |b, &seq| {
            exec::force_sequential(seq);
            b.iter(|| row_sum_bound(&aux, (0.0, 1.0), preset.domain, &sampling).unwrap());
        });
    }
    group.finish();
    exec::force_sequential(false);
}

criterion_group!(
    benches,
    bench_apply_operator,
    bench_implicit_step,
    bench_holder_seminorm,
    bench_row_sum_sampling
);
criterion_main!(benches);
