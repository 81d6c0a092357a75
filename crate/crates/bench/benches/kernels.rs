use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use epi_bench::{angles, models};
use epi_core::{
    channel_capacity, estimate_mle, fisher_information_numeric, joint_distribution, sample, solve_amplitude_constants,
    solve_generating_ode, Angle, FisherForm, GeneratingEquation,
};

fn bench_model(c: &mut Criterion) {
    let thetas = angles();
    let mut group = c.benchmark_group("model");
    for model in models() {
        group.bench_with_input(BenchmarkId::new("joint_distribution", model.n()), &model, |b, &m| {
            b.iter(|| thetas.iter().map(|&t| joint_distribution(t, m).total()).sum::<f64>())
        });
        for form in FisherForm::ALL {
            group.bench_with_input(BenchmarkId::new(format!("fisher_{form:?}"), model.n()), &model, |b, &m| {
                b.iter(|| {
                    thetas.iter().map(|&t| fisher_information_numeric(t, m, form, 1e-4).unwrap_or(0.0)).sum::<f64>()
                })
            });
        }
        group.bench_with_input(BenchmarkId::new("channel_capacity_1024", model.n()), &model, |b, &m| {
            b.iter(|| channel_capacity(black_box(m), 1024).unwrap())
        });
    }
    group.finish();
}

fn bench_solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solver");
    let eq = GeneratingEquation::new(-4.0).unwrap();
    group.bench_function("rk4_4097", |b| {
        b.iter(|| solve_generating_ode(&eq, black_box(0.0), black_box(0.5), 4097).unwrap())
    });
    group.bench_function("solve_constants", |b| b.iter(|| solve_amplitude_constants(black_box(2)).unwrap()));
    group.finish();
}

fn bench_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sampling");
    let [electrons, _] = models();
    for m in [1_000u64, 10_000] {
        group.bench_with_input(BenchmarkId::new("sample_and_mle", m), &m, |b, &m| {
            let mut seed = 0u64;
            b.iter(|| {
                seed += 1;
                let s = sample(Angle::new(1.0), electrons, m, seed).unwrap();
                estimate_mle(&s)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_model, bench_solver, bench_sampling);
criterion_main!(benches);
