use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use dqbfloc_bench::instance_batch;
use dqbfloc_core::fixtures;
use dqbfloc_core::io::{parse_dqcir, write_dqcir};
use dqbfloc_core::localize::{build_macrogates, localize, normalize_to_nnf, LocalizeConfig};
use dqbfloc_core::{run, EventLog, PipelineConfig};

fn bench_full_pipeline(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let circuit = fixtures::running_circuit();
    c.bench_function("pipeline/running_circuit", |b| {
        b.iter(|| black_box(run(&circuit, &cfg)))
    });

    for (label, inner) in [("small", 8), ("medium", 24)] {
        let batch = instance_batch(16, inner);
        c.bench_function(&format!("pipeline/random_{}", label), |b| {
            b.iter(|| {
                for p in &batch {
                    black_box(run(p, &cfg));
                }
            })
        });
    }
}

fn bench_localize_only(c: &mut Criterion) {
    let circuit = fixtures::running_circuit();
    c.bench_function("localize/running_circuit", |b| {
        b.iter_batched(
            || normalize_to_nnf(&circuit),
            |mut d| {
                build_macrogates(&mut d);
                let mut log = EventLog::new();
                localize(&mut d, &LocalizeConfig::default(), &mut log);
                black_box(d)
            },
            BatchSize::SmallInput,
        )
    });
}

fn bench_io(c: &mut Criterion) {
    let text = fixtures::RUNNING_CIRCUIT_DQCIR;
    c.bench_function("io/parse_dqcir", |b| {
        b.iter(|| black_box(parse_dqcir(black_box(text)).unwrap()))
    });
    let parsed = parse_dqcir(text).unwrap();
    c.bench_function("io/write_dqcir", |b| {
        b.iter(|| black_box(write_dqcir(black_box(&parsed))))
    });
}

criterion_group!(benches, bench_full_pipeline, bench_localize_only, bench_io);
criterion_main!(benches);
