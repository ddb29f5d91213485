//! Exact solutions of `z' + Az = f` for exponential-polynomial forcing.

use nalgebra::DMatrix;

use crate::linalg::{shifted, ComplexMatrix, ComplexVec, Factorized, C64, ZERO};

use super::{ClassError, ExpPolySum, ExpPolyTerm};

/// `A + νI` counts as singular when its smallest singular value is below this
/// fraction of `max(1, ‖A + νI‖)`.
pub const RESONANCE_TOL: f64 = 1e-10;

/// How the free constants of a resonant exponent are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResonancePolicy {
    /// Return the particular solution with no component along the
    /// homogeneous modes; the modes are reported separately.
    #[default]
    ZeroFreeConstants,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventSolution {
    pub particular: ExpPolySum,
    /// Basis `q(t) e^{νt}` of homogeneous solutions at resonant exponents.
    pub resonant_modes: Vec<ExpPolySum>,
}

/// Solve `z' + Az = f` termwise.
///
/// Away from resonance the term at exponent `ν` is
/// `e^{νt} Σ_k (-1)^k (A + νI)^{-(k+1)} p^{(k)}(t)`. When `A + νI` is
/// singular the polynomial degree is raised by `r = 1, 2, …, n` until the
/// stacked coefficient system is consistent; the minimum-norm solution of that
/// system is returned and the null space of the system becomes the list of
/// resonant modes.
pub fn resolvent_solve_exp(
    a: &ComplexMatrix,
    f: &ExpPolySum,
    policy: ResonancePolicy,
) -> Result<ResolventSolution, ClassError> {
    let ResonancePolicy::ZeroFreeConstants = policy;
    let n = a.nrows();
    if f.dim() != n {
        return Err(ClassError::DimensionMismatch {
            expected: n,
            got: f.dim(),
        });
    }
    let mut raw = Vec::with_capacity(f.len());
    let mut modes = Vec::new();
    for term in f.terms() {
        let m = shifted(a, term.exponent);
        let sv = crate::linalg::singular_values(&m);
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let lu = (smin > RESONANCE_TOL * smax.max(1.0))
            .then(|| Factorized::new(&m, 0.0))
            .flatten();
        match lu {
            Some(lu) => raw.push(nonresonant_term(&lu, term)),
            None => {
                let (particular, kernel) = resonant_term(&m, term, n)?;
                raw.push(particular);
                modes.extend(kernel);
            }
        }
    }
    Ok(ResolventSolution {
        particular: ExpPolySum::canonicalize(n, raw),
        resonant_modes: modes,
    })
}

fn nonresonant_term(lu: &Factorized, term: &ExpPolyTerm) -> ExpPolyTerm {
    let apply =
        |poly: &[ComplexVec]| -> Vec<ComplexVec> { poly.iter().map(|c| lu.solve(c)).collect() };
    let mut w = apply(&term.coeffs);
    let mut total = w.clone();
    for _ in 0..term.degree() {
        // w ← -M^{-1} w'
        let deriv: Vec<ComplexVec> = (1..w.len())
            .map(|d| &w[d] * C64::new(-(d as f64), 0.0))
            .collect();
        w = apply(&deriv);
        for (d, c) in w.iter().enumerate() {
            total[d] += c;
        }
    }
    ExpPolyTerm::new(term.exponent, total)
}

fn resonant_term(
    m: &ComplexMatrix,
    term: &ExpPolyTerm,
    max_bump: usize,
) -> Result<(ExpPolyTerm, Vec<ExpPolySum>), ClassError> {
    let n = m.nrows();
    let d = term.degree();
    let f_norm = term
        .coeffs
        .iter()
        .map(|c| c.norm_squared())
        .sum::<f64>()
        .sqrt();
    for bump in 1..=max_bump {
        let top = d + bump;
        let size = (top + 1) * n;
        // Row block j: M q_j + (j+1) q_{j+1} = p_j.
        let mut k = DMatrix::<C64>::zeros(size, size);
        let mut rhs = ComplexVec::zeros(size);
        for j in 0..=top {
            k.view_mut((j * n, j * n), (n, n)).copy_from(m);
            if j < top {
                for i in 0..n {
                    k[(j * n + i, (j + 1) * n + i)] = C64::new((j + 1) as f64, 0.0);
                }
            }
            if j <= d {
                rhs.rows_mut(j * n, n).copy_from(&term.coeffs[j]);
            }
        }
        let svd = k.clone().svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let eps = RESONANCE_TOL * smax.max(1.0);
        let x = svd.solve(&rhs, eps).expect("U and V computed");
        let residual = (&k * &x - &rhs).norm();
        if residual > RESONANCE_TOL * f_norm.max(f64::MIN_POSITIVE) {
            continue;
        }
        let coeffs: Vec<ComplexVec> = (0..=top).map(|j| x.rows(j * n, n).into_owned()).collect();
        let v_t = svd.v_t.as_ref().expect("V computed");
        let kernel = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s <= eps)
            .map(|(i, _)| {
                let v: ComplexVec = v_t.row(i).transpose().map(|z| z.conj());
                kernel_mode(term.exponent, normalize_phase(v), n, top)
            })
            .collect();
        return Ok((ExpPolyTerm::new(term.exponent, coeffs), kernel));
    }
    Err(ClassError::ResonanceUnresolved {
        exponent: term.exponent,
        max_bump,
    })
}

/// Rotate so the largest entry is real and positive.
fn normalize_phase(v: ComplexVec) -> ComplexVec {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(ZERO);
    if pivot == ZERO {
        return v;
    }
    let phase = pivot.conj() / pivot.norm();
    v * phase
}

fn kernel_mode(exponent: C64, v: ComplexVec, n: usize, top: usize) -> ExpPolySum {
    let coeffs = (0..=top).map(|j| v.rows(j * n, n).into_owned()).collect();
    ExpPolySum::canonicalize(n, [ExpPolyTerm::new(exponent, coeffs)])
}
