use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use disca_core::accumulator::{accumulate, CorrectionVector, SegmentConfig};
use disca_core::bp_format::{derive_code_table, SearchConfig};
use disca_core::engine::run_matmul;
use disca_core::sram_core::{DecoderState, Subarray, Wordline};
use disca_core::{BPCodeTable, BPDigit, EngineConfig, MatMulJob, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn code_search(c: &mut Criterion) {
    let config = SearchConfig {
        restarts: 16,
        ..SearchConfig::default()
    };
    c.bench_function("derive_code_table/16_restarts", |b| {
        b.iter(|| derive_code_table(black_box(&config), 0))
    });
}

fn bitline(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut s = Subarray::new();
    s.write_row(64, Wordline::from_words(rng.gen())).unwrap();
    s.write_row(0, Wordline::from_words(rng.gen())).unwrap();
    let mut d = DecoderState::default();
    c.bench_function("compute_and", |b| {
        b.iter(|| {
            s.compute_and(&mut d, black_box(64), black_box(0), false)
                .unwrap()
        })
    });

    let cfg = SegmentConfig::default();
    let w = Wordline::from_words(rng.gen());
    let corr =
        CorrectionVector::new((0..cfg.count()).map(|_| rng.gen_range(0..=2)).collect()).unwrap();
    c.bench_function("accumulate", |b| {
        b.iter(|| accumulate(black_box(&w), &cfg, black_box(&corr)).unwrap())
    });
}

fn matmul(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let table = Arc::new(BPCodeTable::default_bp10());
    let config = EngineConfig::default();
    let mut group = c.benchmark_group("run_matmul");
    for size in [16usize, 64, 128] {
        let mut digits =
            |r, c| Matrix::from_fn(r, c, |_, _| BPDigit::new(rng.gen_range(0..10)).unwrap());
        let l = digits(size, size);
        let u = digits(size, size);
        let job = MatMulJob::new(l, u, 1.0, 1.0, table.clone()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(size), &job, |b, job| {
            b.iter(|| run_matmul(job, &config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, code_search, bitline, matmul);
criterion_main!(benches);
