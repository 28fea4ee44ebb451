//! Benchmarks for the data-parallel hot paths, comparing the rayon execution
//! against a single-thread pool (the runtime equivalent of the sequential
//! fallback).
//!
//! Build the true fallback with `--no-default-features` and compare criterion
//! baselines across the two runs; this suite itself requires the `parallel`
//! feature.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use mlca_core::fmeasure::maximize_f_abstain;
use mlca_core::hamming::minimize_hamming;
use mlca_core::oracle::brute_minimize_hamming;
use mlca_core::rank::minimize_rank;
use mlca_core::{MarginalVector, PenaltySpec};

fn random_mv(rng: &mut Xoshiro256PlusPlus, m: usize) -> MarginalVector {
    MarginalVector::new((0..m).map(|_| rng.gen()).collect()).unwrap()
}

fn serial_pool() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()
}

/// Exhaustive 3^m search; the candidate scan is rayon-parallel inside.
fn bench_oracle_hamming(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_hamming");
    group.sample_size(20);
    let pool = serial_pool();
    for m in [6, 7] {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(m as u64);
        let p = random_mv(&mut rng, m);
        let f = PenaltySpec::linear(m, 0.2).unwrap();
        group.bench_with_input(BenchmarkId::new("serial", m), &m, |b, _| {
            b.iter(|| pool.install(|| brute_minimize_hamming(&p, &f).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("parallel", m), &m, |b, _| {
            b.iter(|| brute_minimize_hamming(&p, &f).unwrap())
        });
    }
    group.finish();
}

/// Instance-level batch prediction, the pattern the sweep harness runs.
fn bench_batch_hamming(c: &mut Criterion) {
    let mut group = c.benchmark_group("batch_hamming");
    group.sample_size(20);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(42);
    let m = 64;
    let batch: Vec<MarginalVector> = (0..2048).map(|_| random_mv(&mut rng, m)).collect();
    let f = PenaltySpec::linear(m, 0.2).unwrap();
    group.bench_function("serial", |b| {
        b.iter(|| {
            batch
                .iter()
                .map(|p| minimize_hamming(p, &f).unwrap().expected_loss)
                .sum::<f64>()
        })
    });
    group.bench_function("parallel", |b| {
        b.iter(|| {
            batch
                .par_iter()
                .map(|p| minimize_hamming(p, &f).unwrap().expected_loss)
                .sum::<f64>()
        })
    });
    group.finish();
}

/// The O(m^3) window scan; its per-k passes are rayon-parallel inside.
fn bench_f_abstain(c: &mut Criterion) {
    let mut group = c.benchmark_group("f_abstain");
    group.sample_size(10);
    let pool = serial_pool();
    for m in [100, 200, 400] {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(m as u64);
        let p = random_mv(&mut rng, m);
        let f = PenaltySpec::linear(m, 0.1).unwrap();
        group.bench_with_input(BenchmarkId::new("serial", m), &m, |b, _| {
            b.iter(|| pool.install(|| maximize_f_abstain(&p, &f).unwrap().expected_value))
        });
        group.bench_with_input(BenchmarkId::new("parallel", m), &m, |b, _| {
            b.iter(|| maximize_f_abstain(&p, &f).unwrap().expected_value)
        });
    }
    group.finish();
}

/// Single-instance O(m log m) minimizers at large m; these are sequential by
/// design, benched for throughput only.
fn bench_large_single_instance(c: &mut Criterion) {
    let mut group = c.benchmark_group("single_instance_large");
    group.sample_size(20);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
    let m = 10_000;
    let p = random_mv(&mut rng, m);
    let f = PenaltySpec::linear(m, 0.2).unwrap();
    group.bench_function("hamming_m10k", |b| {
        b.iter(|| minimize_hamming(&p, &f).unwrap().expected_loss)
    });
    group.bench_function("rank_m10k", |b| {
        b.iter(|| minimize_rank(&p, &f).unwrap().expected_loss)
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_oracle_hamming,
    bench_batch_hamming,
    bench_f_abstain,
    bench_large_single_instance
);
criterion_main!(benches);
