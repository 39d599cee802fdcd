use criterion::{criterion_group, criterion_main, Criterion};
use saddle_core::homology::{critical_groups, shift_models, verify_shift_theorem, HomologyOptions};

fn critical_group_pair(c: &mut Criterion) {
    let opts = HomologyOptions::default();
    let models = shift_models();
    let monkey = models.iter().find(|e| e.model.id() == "monkey_fiber").unwrap();
    let center = vec![0.0; monkey.model.dim()];
    let mut group = c.benchmark_group("homology");
    group.sample_size(10);
    group.bench_function("critical_groups_3d", |b| {
        b.iter(|| critical_groups(&monkey.model, &center, &opts).unwrap())
    });
    let quartic = models.iter().find(|e| e.model.id() == "quartic_fiber").unwrap();
    group.bench_function("shift_theorem_2d", |b| {
        b.iter(|| verify_shift_theorem(&quartic.model, &quartic.reduced_point, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, critical_group_pair);
criterion_main!(benches);
