use criterion::{black_box, criterion_group, criterion_main, Criterion};
use pfspectra_core::scalar::Scalar;
use pfspectra_core::shift::ShiftSystem;
use pfspectra_core::spectral::EigenSystem;
use pfspectra_core::twosided::{
    build_operator, perturbation_coefficient, TensorCoeffs, TensorIndex,
};
use pfspectra_core::{histogram_simulation, IntervalMap, Observable};

fn bench_eigen_systems(c: &mut Criterion) {
    let full2 = ShiftSystem::full2_uniform();
    c.bench_function("eigen_system full2 n=16", |b| {
        b.iter(|| EigenSystem::new(black_box(&full2), 16).unwrap())
    });
    let golden = ShiftSystem::golden_mean();
    c.bench_function("eigen_system golden n=8", |b| {
        b.iter(|| EigenSystem::new(black_box(&golden), 8).unwrap())
    });
}

fn bench_decompose_iterate(c: &mut Criterion) {
    let sys = ShiftSystem::full2_uniform();
    let es = EigenSystem::new(&sys, 12).unwrap();
    let f = Observable::poly(pfspectra_core::poly::Poly::from_coeffs(
        (0..=12).map(|k| Scalar::ratio(k as i64 + 1, 3)).collect(),
    ));
    c.bench_function("decompose degree-12 observable", |b| {
        b.iter(|| es.decompose(black_box(&f)).unwrap())
    });
    c.bench_function("iterate k=32", |b| {
        b.iter(|| es.iterate(black_box(&f), 32).unwrap())
    });
}

fn bench_cylinder_machinery(c: &mut Criterion) {
    let golden = ShiftSystem::golden_mean();
    c.bench_function("golden cylinder measures depth 12", |b| {
        b.iter(|| {
            let mut acc = Scalar::zero();
            for w in golden.admissible_words(12) {
                let cyl = golden.cylinder(&w).unwrap();
                acc = &acc + &golden.cylinder_measure(&cyl);
            }
            acc
        })
    });
}

fn bench_twosided(c: &mut Criterion) {
    c.bench_function("build_operator eps=1 M=N=6", |b| {
        b.iter(|| build_operator(Scalar::one(), 6, 6))
    });
    let op = build_operator(Scalar::one(), 6, 6);
    c.bench_function("jordan_analysis k=2", |b| {
        b.iter(|| op.jordan_analysis(black_box(2)).unwrap())
    });
    let f = TensorCoeffs::delta(TensorIndex { i: 3, j: 0 });
    let g = TensorCoeffs::delta(TensorIndex { i: 0, j: 3 });
    c.bench_function("perturbation_coefficient k=3", |b| {
        b.iter(|| perturbation_coefficient(3, black_box(&f), black_box(&g)))
    });
}

fn bench_simulation(c: &mut Criterion) {
    let map = IntervalMap::golden_mult();
    c.bench_function("histogram 100k samples", |b| {
        b.iter(|| histogram_simulation(black_box(&map), 100_000, 20, 7, 32, 1).unwrap())
    });
}

criterion_group!(
    benches,
    bench_eigen_systems,
    bench_decompose_iterate,
    bench_cylinder_machinery,
    bench_twosided,
    bench_simulation
);
criterion_main!(benches);
