use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use dqbfloc_bench::instance_batch;
use dqbfloc_core::fixtures;
use dqbfloc_core::oracle::{is_sat, sem_def, sem_rec, OracleConfig};

fn bench_semantics(c: &mut Criterion) {
    let cfg = OracleConfig::default();
    let (d, _, _, _) = fixtures::scoped_choice();
    c.bench_function("oracle/sem_def_scoped_choice", |b| {
        b.iter(|| black_box(sem_def(&d, &cfg).unwrap()))
    });
    c.bench_function("oracle/sem_rec_scoped_choice", |b| {
        b.iter(|| black_box(sem_rec(&d, &cfg).unwrap()))
    });
}

fn bench_is_sat(c: &mut Criterion) {
    let cfg = OracleConfig::default();
    let batch = instance_batch(16, 8);
    c.bench_function("oracle/is_sat_random_batch", |b| {
        b.iter(|| {
            for p in &batch {
                black_box(is_sat(&p.to_dqbf(), &cfg).unwrap());
            }
        })
    });
}

criterion_group!(benches, bench_semantics, bench_is_sat);
criterion_main!(benches);
