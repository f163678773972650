use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polyrange::environment::DisorderField;
use polyrange::limits::gamma_d_estimate;
use polyrange::par;
use polyrange::partition::{log_partition_exact, partition_mc, Coupling};
use polyrange::rng::Streams;
use polyrange::ModelParams;
use std::hint::black_box;

fn compare<R: Send>(c: &mut Criterion, name: &str, f: impl Fn() -> R + Sync + Send) {
    let mut g = c.benchmark_group(name);
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("mode", "parallel"), |b| b.iter(|| black_box(f())));
    g.bench_function(BenchmarkId::new("mode", "sequential"), |b| {
        b.iter(|| black_box(par::sequential(&f)))
    });
    g.finish();
}

fn benches(c: &mut Criterion) {
    let params = ModelParams::new(2, 1.5, 0.7, 0.5, 0.5, 0.5, 0.5);
    let field = DisorderField::new(1, params.alpha, params.p).unwrap();
    compare(c, "exact_enumeration_n10", || {
        log_partition_exact(&field, 2, 10, &[Coupling::at(&params, 10)], None).unwrap()
    });
    compare(c, "plain_mc_n64", || {
        partition_mc(&field, &params, 64, 50_000, &Streams::new(2), None).unwrap()
    });
    compare(c, "range_rate_d3", || gamma_d_estimate(3, 2_000, 4_000, &Streams::new(3)).unwrap());
    compare(c, "environment_ball_r40", || field.ball_values(2, 40.0));
}

criterion_group!(parallel, benches);
criterion_main!(parallel);
