use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use saddle_core::problem::{FieldRole, MatrixField};
use saddle_core::spectral::solve_weighted_eigenproblem;
use saddle_core::GridDomain;

fn weighted_spectrum(c: &mut Criterion) {
    let weight = MatrixField::diag(FieldRole::Other, 3.5, 1.0);
    let mut group = c.benchmark_group("weighted_spectrum");
    group.sample_size(10);
    for nodes in [63, 127, 255] {
        let grid = GridDomain::unit_interval(nodes).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &grid, |b, grid| {
            b.iter(|| solve_weighted_eigenproblem(grid, &weight, grid.field_len()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, weighted_spectrum);
criterion_main!(benches);
