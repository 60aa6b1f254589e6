//! Wall-clock counterpart to the cost model: time the session-matrix
//! generation pass (derive + product tables) for one fixture per structure
//! class, plus MDS verification on its own.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dynmds::{derive_session_matrix_with_tables, is_mds};
use dynmds_bench::class_fixtures;

fn bench_generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate_session_matrix");
    for (class, matrix) in class_fixtures() {
        group.bench_with_input(BenchmarkId::from_parameter(class.name()), &matrix, |b, m| {
            b.iter(|| derive_session_matrix_with_tables(black_box(m), black_box(0x02)).unwrap());
        });
    }
    group.finish();
}

fn bench_verification(c: &mut Criterion) {
    let aes = dynmds::fixtures::aes_circulant();
    c.bench_function("is_mds/4x4", |b| b.iter(|| is_mds(black_box(&aes)).unwrap()));
}

criterion_group!(benches, bench_generation, bench_verification);
criterion_main!(benches);
