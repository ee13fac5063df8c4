use criterion::{criterion_group, criterion_main, Criterion};
use pdflow_core::certify::{
    build_error_system, build_transformed_system, certify_rate, FrequencyGrid, DEFAULT_TOLERANCE,
};
use pdflow_core::dynamics::{integrate, Flow, IntegrateOptions};
use pdflow_core::linalg::spectral_abscissa;
use pdflow_core::problem::library_instance;

fn kernels(c: &mut Criterion) {
    let p = library_instance("partially_strongly_convex").unwrap();
    let sys = build_error_system(&p).unwrap();
    c.bench_function("spectral_abscissa", |b| {
        b.iter(|| spectral_abscissa(std::hint::black_box(&sys.a)).unwrap())
    });

    let tran = build_transformed_system(&p, p.objective.declared_mu).unwrap();
    let grid = FrequencyGrid::default();
    c.bench_function("certify_rate", |b| {
        b.iter(|| certify_rate(&tran, &grid, DEFAULT_TOLERANCE).unwrap())
    });

    let z0 = p.known_solution.clone().map(|mut s| {
        s.x.iter_mut().for_each(|v| *v += 1.0);
        s
    });
    let opts = IntegrateOptions::fixed(10.0, 1e-3, 10);
    c.bench_function("integrate_augmented_10s", |b| {
        b.iter(|| integrate(Flow::Augmented(&p), z0.as_ref().unwrap(), None, &opts).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = kernels
}
criterion_main!(benches);
