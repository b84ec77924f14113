use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nlform::isoperimetry::{kappa_orlicz, profile_of, FlowModel};
use nlform::lattice::{convolve_fft, on_diagonal, p1_at, p1_kernel, subord_weights};
use nlform::perturbed::{phi_l, RadialWeight};
use nlform::superpoincare::sp_estimate;
use nlform::young::orlicz_norm;
use nlform::YoungFunction;
use nlform_bench::{functions, instance};

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("profile");
    for m in [8usize, 12, 16] {
        let inst = instance(m, 3);
        let model = FlowModel::new(&inst.space, &inst.kernel, &inst.gamma).unwrap();
        g.bench_with_input(BenchmarkId::new("enumerate", m), &model, |b, model| b.iter(|| profile_of(black_box(model)).unwrap()));
    }
    let inst = instance(12, 3);
    let model = FlowModel::new(&inst.space, &inst.kernel, &inst.gamma).unwrap();
    let n = YoungFunction::power(1.5);
    g.bench_function("kappa_orlicz/12", |b| b.iter(|| kappa_orlicz(black_box(&model), &n).unwrap()));
    g.finish();
}

fn orlicz(c: &mut Criterion) {
    let inst = instance(10, 5);
    let fam = functions(10, 64);
    let n = YoungFunction::MinPower { p1: 1.5, p2: 3.0 };
    c.bench_function("orlicz_norm/64x10", |b| {
        b.iter(|| fam.iter().map(|f| orlicz_norm(inst.space.mu(), &n, black_box(f)).to_f64()).sum::<f64>())
    });
}

fn super_poincare(c: &mut Criterion) {
    let inst = instance(10, 7);
    c.bench_function("sp_estimate/10", |b| b.iter(|| sp_estimate(&inst.space, &inst.kernel, black_box(0.5), 0).unwrap()));
}

fn lattice(c: &mut Criterion) {
    let mut g = c.benchmark_group("lattice");
    g.sample_size(20);
    let w = subord_weights(1.0, 100_000).unwrap();
    g.bench_function("p1_at/2d/K=1e5", |b| b.iter(|| p1_at(&w, 2, black_box(&[17, 5])).unwrap()));
    g.bench_function("on_diagonal/2d", |b| b.iter(|| on_diagonal(2, 1.0, black_box(16.0)).unwrap()));
    let p = p1_kernel(2, 1.0, 32, 32).unwrap();
    g.bench_function("convolve_fft/65x65", |b| b.iter(|| convolve_fft(black_box(&p.window), &p.window)));
    g.finish();
}

fn perturbed(c: &mut Criterion) {
    let w = RadialWeight::log_family(2, 1.0, 1.0).unwrap();
    c.bench_function("phi_l/log", |b| b.iter(|| phi_l(&w, black_box(100.0)).unwrap()));
}

criterion_group!(benches, enumeration, orlicz, super_poincare, lattice, perturbed);
criterion_main!(benches);
