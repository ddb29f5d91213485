#![allow(dead_code)]

use asymptotics_core::linalg::{ComplexMatrix, ComplexVec, C64};
use asymptotics_core::{ExpPolySum, ExpPolyTerm, ExponentVector, LogPowerSum, LogPowerTerm};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rand_c(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    c(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

pub fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> ComplexVec {
    ComplexVec::from_fn(n, |_, _| rand_c(rng, 1.0))
}

/// Real matrix `λ I + small` with every eigenvalue real part near `λ`.
pub fn rand_real_stable(rng: &mut ChaCha8Rng, n: usize, lambda: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        let off = rng.random_range(-0.2..0.2);
        c(if i == j { lambda + off } else { off }, 0.0)
    })
}

/// Log-power sum of depth `depth` whose terms come in conjugate pairs.
pub fn symmetric_log_power(rng: &mut ChaCha8Rng, n: usize, depth: i32, re_m: f64) -> LogPowerSum {
    let width = (depth + 2) as usize;
    let mut raw = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        let mut e: Vec<C64> = (0..width)
            .map(|_| c(0.0, rng.random_range(-2.0..2.0)))
            .collect();
        e[0] = c(0.0, rng.random_range(-2.0..2.0));
        e[width - 1].re = rng.random_range(-1.0..1.0);
        e[2.min(width - 1)].re = -re_m;
        let e = ExponentVector::new(e);
        let xi = rand_vec(rng, n);
        raw.push(LogPowerTerm::new(e.conj(), xi.map(|z| z.conj())));
        raw.push(LogPowerTerm::new(e, xi));
    }
    LogPowerSum::canonicalize(n, depth, raw).unwrap()
}

pub fn rand_exp_poly(rng: &mut ChaCha8Rng, n: usize, re: f64) -> ExpPolySum {
    let raw: Vec<ExpPolyTerm> = (0..rng.random_range(1..=3))
        .map(|_| {
            let nu = c(re, rng.random_range(-3.0..3.0));
            let deg = rng.random_range(0..=2);
            ExpPolyTerm::new(nu, (0..=deg).map(|_| rand_vec(rng, n)).collect())
        })
        .collect();
    ExpPolySum::canonicalize(n, raw)
}

pub fn geometric(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64))
        .collect()
}
