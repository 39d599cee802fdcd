use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use saddle_bench::{probe_point, resonant_reduction};
use saddle_core::reduction::SplitFunctional;

fn fiber_solve(c: &mut Criterion) {
    let handle = resonant_reduction(127);
    let dim = handle.system().minus_dim();
    let mut group = c.benchmark_group("fiber_solve");
    for radius in [0.1, 10.0, 1000.0] {
        let v = probe_point(dim, radius);
        group.bench_with_input(BenchmarkId::from_parameter(radius), &v, |b, v| {
            b.iter(|| {
                handle.clear_cache();
                handle.solve_psi(v).unwrap()
            })
        });
    }
    group.finish();
}

fn reduced_gradient(c: &mut Criterion) {
    let handle = resonant_reduction(127);
    let v = probe_point(handle.system().minus_dim(), 5.0);
    c.bench_function("reduced_gradient", |b| {
        b.iter(|| {
            handle.clear_cache();
            handle.reduced_gradient(&v).unwrap()
        })
    });
}

criterion_group!(benches, fiber_solve, reduced_gradient);
criterion_main!(benches);
