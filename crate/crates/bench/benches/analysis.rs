use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use revmeta_bench::{skewed_points, synthetic_estimates, synthetic_medline, synthetic_tables};
use revmeta_core::{
    odds_ratio, parse_medline, pool_iv_fixed, pool_mh_fixed, pool_random_dl, trim_and_fill,
    Measure, QSource, TwoByTwoTable,
};

fn effect_measures(c: &mut Criterion) {
    let wu = TwoByTwoTable::new(243, 268, 118, 135).unwrap();
    c.bench_function("odds_ratio_single_table", |b| {
        b.iter(|| odds_ratio(black_box(&wu), 0.95))
    });
}

fn pooling(c: &mut Criterion) {
    let mut group = c.benchmark_group("pooling");
    for k in [11usize, 100] {
        let tables = synthetic_tables(k);
        let estimates = synthetic_estimates(k);
        group.bench_with_input(
            BenchmarkId::new("mantel_haenszel_or", k),
            &tables,
            |b, t| b.iter(|| pool_mh_fixed(black_box(t), Measure::OddsRatio, 0.95)),
        );
        group.bench_with_input(
            BenchmarkId::new("inverse_variance", k),
            &estimates,
            |b, e| b.iter(|| pool_iv_fixed(black_box(e), 0.95)),
        );
        group.bench_with_input(
            BenchmarkId::new("dersimonian_laird", k),
            &estimates,
            |b, e| b.iter(|| pool_random_dl(black_box(e), QSource::InverseVariance, 0.95)),
        );
    }
    group.finish();
}

fn bias_diagnostics(c: &mut Criterion) {
    let points = skewed_points(40);
    c.bench_function("trim_and_fill_40_points", |b| {
        b.iter(|| trim_and_fill(black_box(&points), 0.95).unwrap())
    });
}

fn medline(c: &mut Criterion) {
    let text = synthetic_medline(100);
    c.bench_function("parse_medline_100_records", |b| {
        b.iter(|| parse_medline(black_box(&text)))
    });
}

criterion_group!(benches, effect_measures, pooling, bias_diagnostics, medline);
criterion_main!(benches);
