//! Small dense complex linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type ComplexVec = DVector<C64>;
pub type ComplexMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn cvec(entries: &[C64]) -> ComplexVec {
    DVector::from_column_slice(entries)
}

/// Real vector lifted to `ℂⁿ`.
pub fn rvec(entries: &[f64]) -> ComplexVec {
    DVector::from_iterator(entries.len(), entries.iter().map(|&x| C64::new(x, 0.0)))
}

/// Row-major real matrix lifted to `ℂⁿˣⁿ`.
pub fn rmat(rows: &[&[f64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
}

pub fn is_real_matrix(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.im == 0.0)
}

pub fn is_real_vec(v: &ComplexVec, tol: f64) -> bool {
    v.iter()
        .all(|z| z.im.abs() <= tol * z.norm().max(f64::MIN_POSITIVE))
}

/// Eigenvalues from the complex Schur form.
pub fn eigenvalues(a: &ComplexMatrix) -> Vec<C64> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![a[(0, 0)]];
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .expect("Schur iteration did not converge");
    let (_, t) = schur.unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

/// Distinct real parts of the spectrum, ascending, merged at relative tolerance `tol`.
pub fn spectrum_real_parts(a: &ComplexMatrix, tol: f64) -> Vec<f64> {
    let mut re: Vec<f64> = eigenvalues(a).iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(re.len());
    for x in re {
        match out.last() {
            Some(&last) if (x - last).abs() <= tol * last.abs().max(1.0) => {}
            _ => out.push(x),
        }
    }
    out
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    svd.singular_values.iter().copied().collect()
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

pub fn smallest_singular_value(m: &ComplexMatrix) -> f64 {
    singular_values(m).into_iter().fold(f64::INFINITY, f64::min)
}

/// `A + λI`.
pub fn shifted(a: &ComplexMatrix, lambda: C64) -> ComplexMatrix {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += lambda;
    }
    m
}

/// LU factorisation with partial pivoting that refuses numerically singular input.
#[derive(Debug, Clone)]
pub struct Factorized {
    lu: nalgebra::linalg::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factorized {
    /// Returns `None` when the smallest pivot is below `rel_tol` times the largest.
    pub fn new(m: &ComplexMatrix, rel_tol: f64) -> Option<Self> {
        let lu = m.clone().lu();
        let u = lu.u();
        let pivots: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
        let max = pivots.iter().copied().fold(0.0, f64::max);
        let min = pivots.iter().copied().fold(f64::INFINITY, f64::min);
        if max == 0.0 || min <= rel_tol * max {
            return None;
        }
        Some(Factorized { lu })
    }

    pub fn solve(&self, b: &ComplexVec) -> ComplexVec {
        self.lu.solve(b).expect("factorisation checked nonsingular")
    }
}
