//! Pipeline-level benchmarks: the special-function constructors and the
//! identity assembly that dominate certification time.

use criterion::{criterion_group, criterion_main, Criterion};

use mockdissect_core::mockforms::{assemble_full, load_identity, r2_eulerian, s_series};
use mockdissect_core::qseries::frac;

fn identity_path() -> String {
    format!("{}/../../identities/c7.json", env!("CARGO_MANIFEST_DIR"))
}

fn bench_special_functions(c: &mut Criterion) {
    c.bench_function("r2_eulerian(1,7) to 200", |b| {
        b.iter(|| r2_eulerian(1, 7, 200));
    });
    c.bench_function("s_series(0,7) to 400", |b| {
        b.iter(|| s_series(0, 7, frac(400, 1), frac(1, 1)).unwrap());
    });
}

fn bench_assembly(c: &mut Criterion) {
    let id = load_identity(identity_path()).unwrap();
    let mut group = c.benchmark_group("assembly");
    group.sample_size(10);
    group.bench_function("assemble_full to q^61", |b| {
        b.iter(|| assemble_full(&id, 61).unwrap());
    });
    group.finish();
}

criterion_group!(benches, bench_special_functions, bench_assembly);
criterion_main!(benches);
