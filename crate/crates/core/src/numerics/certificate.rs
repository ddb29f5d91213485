//! Constants of the smallness condition for global existence and decay.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::ProblemSpec;
use crate::linalg::{is_real_matrix, operator_norm, ComplexMatrix, ComplexVec, C64};

use super::NumericsError;

/// Number of sphere directions sampled per radius when estimating `c_*`.
pub const DEFAULT_DIRECTIONS: usize = 1024;
const RADII: i32 = 16;

/// `λ_1`, `C_0`, `c_*`, `r_*` and the derived smallness thresholds
/// `M = min{r_*, λ_1/(12 C_0 c_*)}`, `ε_0 = min{M/2, M/(6 C_0)}`,
/// `ε_1 = λ_1 M / (12 C_0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallnessCertificate {
    pub lambda1: f64,
    pub c0: f64,
    pub c_star: f64,
    pub r_star: f64,
    pub m: f64,
    pub eps0: f64,
    pub eps1: f64,
}

impl SmallnessCertificate {
    /// Apply the threshold formulas to given constants. `c_star = 0` means
    /// `G = 0` and gives `M = r_star`.
    pub fn from_constants(lambda1: f64, c0: f64, c_star: f64, r_star: f64) -> Self {
        let m = if c_star > 0.0 {
            r_star.min(lambda1 / (12.0 * c0 * c_star))
        } else {
            r_star
        };
        SmallnessCertificate {
            lambda1,
            c0,
            c_star,
            r_star,
            m,
            eps0: (m / 2.0).min(m / (6.0 * c0)),
            eps1: lambda1 * m / (12.0 * c0),
        }
    }
}

/// `‖e^{-tA}‖` (largest singular value) at each `t`.
pub fn matrix_exp_norm(a: &ComplexMatrix, t_grid: &[f64]) -> Vec<f64> {
    t_grid
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                1.0
            } else {
                operator_norm(&(a * C64::from(-t)).exp())
            }
        })
        .collect()
}

/// `C_0 = max_t ‖e^{-tA}‖ e^{λ_1 t / 2}` over `t_grid`.
pub fn estimate_c0(a: &ComplexMatrix, lambda1: f64, t_grid: &[f64]) -> f64 {
    matrix_exp_norm(a, t_grid)
        .iter()
        .zip(t_grid)
        .map(|(norm, t)| norm * (lambda1 * t / 2.0).exp())
        .fold(0.0, f64::max)
}

/// Default grid for [`estimate_c0`]: `4001` uniform points on `[0, 80/λ_1]`,
/// beyond which `e^{-λ_1 t/2}` is negligible against any polynomial transient.
fn c0_grid(lambda1: f64) -> Vec<f64> {
    let end = 80.0 / lambda1;
    (0..=4000).map(|i| end * i as f64 / 4000.0).collect()
}

/// Radical inverse of `i` in base `b`.
fn halton(mut i: usize, b: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

const PRIMES: [usize; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Unit directions: coordinate axes first, then normalised Halton points of
/// `[-1, 1]^d`. Real directions when `real` holds, complex otherwise.
fn directions(n: usize, count: usize, real: bool) -> Vec<ComplexVec> {
    let d = if real { n } else { 2 * n };
    let mut out: Vec<ComplexVec> = (0..n.min(count))
        .map(|i| ComplexVec::from_fn(n, |j, _| C64::from(if i == j { 1.0 } else { 0.0 })))
        .collect();
    let mut i = 1;
    while out.len() < count {
        let x: Vec<f64> = (0..d)
            .map(|k| 2.0 * halton(i + 7919 * (k / PRIMES.len()), PRIMES[k % PRIMES.len()]) - 1.0)
            .collect();
        i += 1;
        let v = if real {
            ComplexVec::from_fn(n, |j, _| C64::from(x[j]))
        } else {
            ComplexVec::from_fn(n, |j, _| C64::new(x[j], x[n + j]))
        };
        let norm = v.norm();
        if norm > 1e-3 {
            out.push(v / C64::from(norm));
        }
    }
    out
}

/// `c_* ≈ max |G(x)| / |x|^2` over `|x| = r_* 2^{-j}`, `j = 0..16`, and
/// `directions` quasi-random unit directions.
pub fn sample_c_star(spec: &ProblemSpec, r_star: f64, directions_count: usize) -> f64 {
    if spec.nonlinearity().is_empty() {
        return 0.0;
    }
    let real = is_real_matrix(spec.a()) && spec.nonlinearity().iter().all(|m| m.is_real());
    let dirs = directions(spec.dim(), directions_count.max(1), real);
    dirs.par_iter()
        .map(|d| {
            (0..RADII)
                .map(|j| {
                    let r = r_star * 0.5f64.powi(j);
                    let x = d * C64::from(r);
                    let g = spec
                        .nonlinearity()
                        .iter()
                        .fold(ComplexVec::zeros(spec.dim()), |acc, m| {
                            acc + m.apply_diagonal(&x)
                        });
                    g.norm() / (r * r)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Smallness certificate with `λ_1` from the spectrum, `C_0` from sampled
/// matrix exponentials and `c_*` from sphere sampling.
pub fn smallness_certificate(
    spec: &ProblemSpec,
    r_star: f64,
    sample_budget: usize,
) -> Result<SmallnessCertificate, NumericsError> {
    if !(r_star > 0.0 && r_star.is_finite()) {
        return Err(NumericsError::NonPositiveRadius(r_star));
    }
    let lambda1 = spec.lambda_min();
    let c0 = estimate_c0(spec.a(), lambda1, &c0_grid(lambda1));
    let c_star = sample_c_star(spec, r_star, sample_budget);
    Ok(SmallnessCertificate::from_constants(
        lambda1, c0, c_star, r_star,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Mode, MultiLinearMap};
    use crate::linalg::rmat;

    #[test]
    fn identity_exponential() {
        let a = rmat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let grid = [0.0, 0.5, 2.0];
        let norms = matrix_exp_norm(&a, &grid);
        assert_eq!(norms[0], 1.0);
        for (n, t) in norms.iter().zip(grid) {
            assert!((n - (-t).exp()).abs() < 1e-14);
        }
        assert!((estimate_c0(&a, 1.0, &c0_grid(1.0)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn transient_growth() {
        let a = rmat(&[&[1.0, 10.0], &[0.0, 1.0]]);
        assert!(estimate_c0(&a, 1.0, &c0_grid(1.0)) > 1.0);
    }

    #[test]
    fn scalar_quadratic_certificate() {
        let spec = ProblemSpec::builder(rmat(&[&[1.0]]), Mode::Exponential)
            .nonlinearity(MultiLinearMap::scalar_power(2))
            .build()
            .unwrap();
        let c = smallness_certificate(&spec, 1.0, DEFAULT_DIRECTIONS).unwrap();
        assert_eq!((c.lambda1, c.c0, c.c_star), (1.0, 1.0, 1.0));
        assert_eq!(c.m, 1.0 / 12.0);
        assert_eq!(c.eps0, 1.0 / 72.0);
        assert_eq!(c.eps1, 1.0 / 144.0);
    }

    #[test]
    fn linear_problem_keeps_radius() {
        let spec = ProblemSpec::builder(rmat(&[&[3.0]]), Mode::Exponential)
            .build()
            .unwrap();
        let c = smallness_certificate(&spec, 0.25, 16).unwrap();
        assert_eq!((c.c_star, c.m), (0.0, 0.25));
        assert!(smallness_certificate(&spec, 0.0, 16).is_err());
    }
}
