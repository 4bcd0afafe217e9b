//! Core series-arithmetic benchmarks: schoolbook multiplication, infinite
//! products via the factor fast paths, and series inversion.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mockdissect_core::cyclotomic::rat;
use mockdissect_core::qseries::{frac, pochhammer_inf, QSeries};
use mockdissect_core::Rational;

fn dense_series(len: i64, seed: i64) -> QSeries<Rational> {
    let mut s = QSeries::<Rational>::zero_on(1, 0, len);
    let mut acc = QSeries::<Rational>::one(len);
    // deterministic pseudo-dense content: a product of a few factors
    for e in [1 + seed % 3, 2 + seed % 5, 3 + seed % 7] {
        acc.mul_one_minus_frac(frac(e.max(1), 1), &rat(-1));
    }
    let euler = pochhammer_inf(frac(1, 1), frac(1, 1), 1, frac(len, 1)).unwrap();
    s = s.add(&acc.mul(&euler.inv().unwrap()));
    s
}

fn bench_mul(c: &mut Criterion) {
    let mut group = c.benchmark_group("qs_mul");
    for len in [128i64, 512] {
        let a = dense_series(len, 1);
        let b = dense_series(len, 2);
        group.bench_with_input(BenchmarkId::from_parameter(len), &len, |bench, _| {
            bench.iter(|| a.mul(&b));
        });
    }
    group.finish();
}

fn bench_pochhammer(c: &mut Criterion) {
    c.bench_function("pochhammer_inf q;q to 1000", |b| {
        b.iter(|| pochhammer_inf(frac(1, 1), frac(1, 1), 1, frac(1000, 1)).unwrap());
    });
    c.bench_function("partition generating function to 500", |b| {
        b.iter(|| {
            pochhammer_inf(frac(1, 1), frac(1, 1), 1, frac(500, 1))
                .unwrap()
                .inv()
                .unwrap()
        });
    });
}

criterion_group!(benches, bench_mul, bench_pochhammer);
criterion_main!(benches);
