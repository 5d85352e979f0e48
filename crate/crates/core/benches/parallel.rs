//! Benchmarks the data-parallel oracle paths against their sequential
//! fallbacks, plus the detection pipeline on the crafted families.
//!
//! Build with the default `parallel` feature to compare both sides; without
//! it only the sequential paths are measured.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dqbf_core::autom::SearchLimits;
use dqbf_core::formula::{truth_value, Clause, Dqbf, Interpretation, Literal, Prefix};
use dqbf_core::generators::{kbkf, parity};
use dqbf_core::oracle::{brute_truth, Budget};
use dqbf_core::pipeline::detect;

/// A k=0 matrix over many universals whose clauses are all tautological:
/// truth evaluation has to walk every one of the 2^n assignments, doing real
/// clause work at each.
fn wide_universal_formula(n: u32) -> Dqbf {
    let prefix = Prefix::new((1..=n).collect(), vec![]).unwrap();
    let matrix = (0..2 * n)
        .map(|i| {
            let a = i % n + 1;
            let b = (i * 7 + 3) % n + 1;
            let c = (i * 13 + 5) % n + 1;
            Clause::new(vec![
                Literal::positive(a),
                Literal::negative(a),
                Literal::positive(b),
                Literal::negative(c),
            ])
        })
        .collect();
    Dqbf::new(prefix, matrix).unwrap()
}

fn bench_truth_value(c: &mut Criterion) {
    let mut group = c.benchmark_group("truth_value");
    for n in [14u32, 18] {
        let f = wide_universal_formula(n);
        let s = Interpretation::constant(f.prefix(), true);
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, _| {
            b.iter(|| truth_value(&f, &s, 24).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, _| {
            b.iter(|| dqbf_core::formula::truth_value_par(&f, &s, 24).unwrap())
        });
    }
    group.finish();
}

fn bench_brute_truth(c: &mut Criterion) {
    let mut group = c.benchmark_group("brute_truth");
    group.sample_size(10);
    // a false formula scans its whole interpretation space
    let f = kbkf(2);
    let seq = Budget::sequential();
    group.bench_function("kbkf2/sequential", |b| {
        b.iter(|| brute_truth(&f, &seq).unwrap())
    });
    #[cfg(feature = "parallel")]
    {
        let par = Budget {
            parallel: true,
            ..Budget::default()
        };
        group.bench_function("kbkf2/parallel", |b| {
            b.iter(|| brute_truth(&f, &par).unwrap())
        });
    }
    group.finish();
}

fn bench_detection(c: &mut Criterion) {
    let mut group = c.benchmark_group("detect");
    group.sample_size(10);
    let limits = SearchLimits::default();
    for n in [10u32, 20] {
        let f = kbkf(n);
        group.bench_with_input(BenchmarkId::new("kbkf", n), &f, |b, f| {
            b.iter(|| detect(f, &limits).unwrap())
        });
        let f = parity(n);
        group.bench_with_input(BenchmarkId::new("parity", n), &f, |b, f| {
            b.iter(|| detect(f, &limits).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_truth_value, bench_brute_truth, bench_detection);
criterion_main!(benches);
