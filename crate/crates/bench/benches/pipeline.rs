use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use recast_bench::{fixture_backend, likert_pairs, sample_text};
use recast_core::stats::kendall_tau_b;
use recast_core::{
    annotate, generate_alternatives, generate_span_alternatives, tokenize, Span, Thresholds,
    ToxicityBackend,
};

fn scoring(c: &mut Criterion) {
    let backend = fixture_backend();
    let thresholds = Thresholds::default();
    let mut group = c.benchmark_group("annotate");
    for bytes in [100, 1_000, 10_000] {
        // sparse enough that even the 10 kB text stays short of a saturated score
        let text = sample_text(bytes, 200);
        let doc = tokenize(&text).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(bytes), &doc, |b, doc| {
            b.iter(|| annotate(black_box(doc), &backend, &thresholds).unwrap())
        });
    }
    group.finish();

    let text = sample_text(10_000, 40);
    c.bench_function("score/10000", |b| {
        b.iter(|| backend.score(black_box(&text)).unwrap())
    });
}

fn alternatives(c: &mut Criterion) {
    let backend = fixture_backend();
    let thresholds = Thresholds::default();
    let doc = tokenize("honestly you are a stupid idiot and your idea is trash").unwrap();
    c.bench_function("alternatives/single", |b| {
        b.iter(|| generate_alternatives(black_box(&doc), 4, &backend, &thresholds).unwrap())
    });
    let mut group = c.benchmark_group("alternatives/span");
    for len in 2..=5 {
        let span = Span::new(3, 3 + len);
        group.bench_with_input(BenchmarkId::from_parameter(len), &span, |b, &span| {
            b.iter(|| {
                generate_span_alternatives(&doc, black_box(span), &backend, &thresholds).unwrap()
            })
        });
    }
    group.finish();
}

fn kendall(c: &mut Criterion) {
    let mut group = c.benchmark_group("kendall_tau_b");
    for n in [50, 1_000, 100_000] {
        let pairs = likert_pairs(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &pairs, |b, pairs| {
            b.iter(|| kendall_tau_b(black_box(pairs)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, scoring, alternatives, kendall);
criterion_main!(benches);
