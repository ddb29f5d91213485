use asymptotics_bench::{resonant, riccati};
use asymptotics_core::linalg::{rmat, rvec, C64};
use asymptotics_core::numerics::{
    integrate, remainder_series, smallness_certificate, verify_lemma_newplem,
};
use asymptotics_core::{expand, LogPowerSum, Regressor};
use criterion::{criterion_group, criterion_main, Criterion};

fn trajectories(c: &mut Criterion) {
    let spec = riccati(2);
    c.bench_function("integrate/riccati 10..1e4", |b| {
        b.iter(|| integrate(&spec, &rvec(&[0.12]), (10.0, 1e4), 1e-12, 1e-20))
    });
    let traj = integrate(&spec, &rvec(&[0.12]), (10.0, 1e4), 1e-12, 1e-20).unwrap();
    let exp = expand(&spec).unwrap();
    c.bench_function("remainder/riccati fit N=2", |b| {
        b.iter(|| {
            remainder_series(&traj, &exp, 2).and_then(|r| r.fit(Regressor::LogLadder(0), None))
        })
    });
}

fn quadrature(c: &mut Criterion) {
    let a = rmat(&[&[1.0]]);
    let p = LogPowerSum::scalar_monomial(&[0.0, 0.0, -1.0], C64::new(1.0, 0.0));
    let grid: Vec<f64> = (0..12)
        .map(|i| 1e5 * 100f64.powf(i as f64 / 11.0))
        .collect();
    c.bench_function("quadrature/1/ln t, 12 points", |b| {
        b.iter(|| verify_lemma_newplem(&a, &p, 20.0, &grid, 1e-13))
    });
}

fn certificate(c: &mut Criterion) {
    let spec = resonant(1);
    c.bench_function("certificate/1024 directions", |b| {
        b.iter(|| smallness_certificate(&spec, 1.0, 1024))
    });
}

criterion_group!(benches, trajectories, quadrature, certificate);
criterion_main!(benches);
