use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use cylmin_bench::{sample_instances, worked_instance};
use cylmin_core::{flow_constant, oracle_min_time, solve_min_time, OracleConfig};

fn flow(c: &mut Criterion) {
    let (p0, _, params) = worked_instance();
    c.bench_function("flow_constant", |b| {
        b.iter(|| flow_constant(black_box(1.3), black_box(p0), black_box(0.7), &params).unwrap())
    });
}

fn planner(c: &mut Criterion) {
    let (p0, p1, params) = worked_instance();
    c.bench_function("solve_min_time/worked", |b| {
        b.iter(|| solve_min_time(black_box(p0), black_box(p1), &params).unwrap())
    });
    let batch = sample_instances(100);
    c.bench_function("solve_min_time/random_100", |b| {
        b.iter(|| {
            for inst in &batch {
                black_box(solve_min_time(inst.from, inst.to, &inst.params).unwrap());
            }
        })
    });
}

fn oracle(c: &mut Criterion) {
    let (p0, p1, params) = worked_instance();
    let cfg = OracleConfig::for_instance(p0, p1, &params, 1);
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("k1/worked", |b| {
        b.iter(|| oracle_min_time(black_box(p0), black_box(p1), &params, &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, flow, planner, oracle);
criterion_main!(benches);
