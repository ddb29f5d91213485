use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use crate::key::ExponentKey;
use crate::linalg::{ComplexMatrix, ComplexVec, C64, ZERO};

use super::{ClassError, MultiLinearMap, CLASS_TOL, TRIM_REL};

/// One term `p(t) e^{νt}`; `coeffs[d]` multiplies `t^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPolyTerm {
    pub exponent: C64,
    pub coeffs: Vec<ComplexVec>,
}

impl ExpPolyTerm {
    pub fn new(exponent: C64, coeffs: Vec<ComplexVec>) -> Self {
        ExpPolyTerm { exponent, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// The polynomial factor `p(t)` by Horner's rule.
    pub fn poly_eval(&self, t: f64) -> ComplexVec {
        let dim = self.coeffs[0].len();
        let t = C64::new(t, 0.0);
        self.coeffs
            .iter()
            .rev()
            .fold(ComplexVec::zeros(dim), |acc, c| acc * t + c)
    }

    pub fn eval(&self, t: f64) -> ComplexVec {
        self.poly_eval(t) * (self.exponent * t).exp()
    }

    /// `(p e^{νt})' = (p' + νp) e^{νt}`.
    fn derivative(&self) -> ExpPolyTerm {
        let coeffs = (0..self.coeffs.len())
            .map(|d| {
                let mut c = &self.coeffs[d] * self.exponent;
                if d + 1 < self.coeffs.len() {
                    c += &self.coeffs[d + 1] * C64::new((d + 1) as f64, 0.0);
                }
                c
            })
            .collect();
        ExpPolyTerm::new(self.exponent, coeffs)
    }
}

/// Element of the exponential-polynomial class over `ℂⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPolySum {
    dim: usize,
    terms: BTreeMap<ExponentKey, ExpPolyTerm>,
}

impl ExpPolySum {
    pub fn zero(dim: usize) -> Self {
        ExpPolySum {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Merge equal exponents, trim negligible coefficients and drop empty terms.
    ///
    /// A coefficient is dropped when its norm is at most [`TRIM_REL`] times the
    /// largest coefficient norm that contributed to its term, so cancellation
    /// residue does not survive as a spurious term.
    pub fn canonicalize(dim: usize, raw: impl IntoIterator<Item = ExpPolyTerm>) -> Self {
        let mut acc: BTreeMap<ExponentKey, (ExpPolyTerm, f64)> = BTreeMap::new();
        for term in raw {
            let key = ExponentKey::of(term.exponent);
            let (slot, scale) = acc
                .entry(key)
                .or_insert_with(|| (ExpPolyTerm::new(term.exponent, Vec::new()), 0.0));
            for (d, c) in term.coeffs.into_iter().enumerate() {
                assert_eq!(c.len(), dim, "coefficient dimension");
                *scale = scale.max(c.norm());
                if d < slot.coeffs.len() {
                    slot.coeffs[d] += c;
                } else {
                    while slot.coeffs.len() < d {
                        slot.coeffs.push(ComplexVec::zeros(dim));
                    }
                    slot.coeffs.push(c);
                }
            }
        }
        let terms = acc
            .into_iter()
            .filter_map(|(key, (mut term, scale))| {
                let threshold = TRIM_REL * scale;
                for c in term.coeffs.iter_mut() {
                    if c.norm() <= threshold {
                        c.fill(ZERO);
                    }
                }
                while term
                    .coeffs
                    .last()
                    .is_some_and(|c| c.iter().all(|z| *z == ZERO))
                {
                    term.coeffs.pop();
                }
                (!term.coeffs.is_empty()).then_some((key, term))
            })
            .collect();
        ExpPolySum { dim, terms }
    }

    pub fn single(exponent: C64, coeffs: Vec<ComplexVec>) -> Self {
        let dim = coeffs.first().map_or(0, |c| c.len());
        Self::canonicalize(dim, [ExpPolyTerm::new(exponent, coeffs)])
    }

    /// Scalar (`n = 1`) term with polynomial coefficients `coeffs`.
    pub fn scalar(exponent: C64, coeffs: &[C64]) -> Self {
        Self::single(
            exponent,
            coeffs
                .iter()
                .map(|&c| ComplexVec::from_element(1, c))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &ExpPolyTerm> {
        self.terms.values()
    }

    pub fn term(&self, exponent: C64) -> Option<&ExpPolyTerm> {
        self.terms.get(&ExponentKey::of(exponent))
    }

    pub(crate) fn keyed_terms(&self) -> impl Iterator<Item = (ExponentKey, &ExpPolyTerm)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn max_degree(&self) -> usize {
        self.terms().map(ExpPolyTerm::degree).max().unwrap_or(0)
    }

    /// Largest coefficient norm over all terms.
    pub fn max_coeff_norm(&self) -> f64 {
        self.terms()
            .flat_map(|t| t.coeffs.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, t: f64) -> ComplexVec {
        self.terms()
            .fold(ComplexVec::zeros(self.dim), |acc, term| acc + term.eval(t))
    }

    pub fn derivative(&self) -> Self {
        Self::canonicalize(self.dim, self.terms().map(ExpPolyTerm::derivative))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::canonicalize(
            self.dim,
            self.terms()
                .map(|t| ExpPolyTerm::new(t.exponent, t.coeffs.iter().map(|v| v * c).collect())),
        )
    }

    /// Left multiplication of every coefficient by `m`.
    pub fn mat_mul(&self, m: &ComplexMatrix) -> Self {
        Self::canonicalize(
            m.nrows(),
            self.terms()
                .map(|t| ExpPolyTerm::new(t.exponent, t.coeffs.iter().map(|v| m * v).collect())),
        )
    }

    /// Multiply by `e^{λt}`.
    pub fn shift(&self, lambda: C64) -> Self {
        Self::canonicalize(
            self.dim,
            self.terms()
                .map(|t| ExpPolyTerm::new(t.exponent + lambda, t.coeffs.clone())),
        )
    }

    pub fn conj(&self) -> Self {
        Self::canonicalize(
            self.dim,
            self.terms().map(|t| {
                ExpPolyTerm::new(
                    t.exponent.conj(),
                    t.coeffs.iter().map(|v| v.map(|z| z.conj())).collect(),
                )
            }),
        )
    }

    /// Common real part of all exponents, if there is one.
    pub fn real_part(&self) -> Option<f64> {
        let mut it = self.terms().map(|t| t.exponent.re);
        let first = it.next()?;
        it.all(|re| (re - first).abs() <= CLASS_TOL * first.abs().max(1.0))
            .then_some(first)
    }

    /// Membership in the class with exponent real part `mu`. The zero sum
    /// belongs to every class.
    pub fn in_class(&self, mu: f64) -> bool {
        self.terms()
            .all(|t| (t.exponent.re - mu).abs() <= CLASS_TOL * mu.abs().max(1.0))
    }

    /// Coefficientwise comparison at relative tolerance `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.dim != other.dim || self.terms.len() != other.terms.len() {
            return false;
        }
        let scale = self
            .max_coeff_norm()
            .max(other.max_coeff_norm())
            .max(f64::MIN_POSITIVE);
        self.terms.iter().all(|(k, a)| {
            other.terms.get(k).is_some_and(|b| {
                a.coeffs.len() == b.coeffs.len()
                    && a.coeffs
                        .iter()
                        .zip(&b.coeffs)
                        .all(|(x, y)| (x - y).norm() <= tol * scale)
            })
        })
    }

    /// Apply a multilinear map termwise: exponents add, polynomials convolve.
    pub fn mul_apply(map: &MultiLinearMap, args: &[&ExpPolySum]) -> Result<Self, ClassError> {
        map.check_args(args.iter().map(|a| a.dim))?;
        if args.iter().any(|a| a.is_zero()) {
            return Ok(Self::zero(map.dim()));
        }
        let term_lists: Vec<Vec<&ExpPolyTerm>> = args.iter().map(|a| a.terms().collect()).collect();
        let lens: Vec<usize> = term_lists.iter().map(Vec::len).collect();
        let mut raw = Vec::new();
        for_each_tuple(&lens, |choice| {
            let chosen: Vec<&ExpPolyTerm> = choice
                .iter()
                .enumerate()
                .map(|(l, &i)| term_lists[l][i])
                .collect();
            let exponent = chosen.iter().map(|t| t.exponent).sum::<C64>();
            let degree: usize = chosen.iter().map(|t| t.degree()).sum();
            let mut coeffs = vec![ComplexVec::zeros(map.dim()); degree + 1];
            for entry in map.entries() {
                let mut poly = vec![entry.value];
                for (term, &component) in chosen.iter().zip(&entry.inputs) {
                    let factor: Vec<C64> = term.coeffs.iter().map(|c| c[component]).collect();
                    poly = poly_mul(&poly, &factor);
                }
                for (d, c) in poly.into_iter().enumerate() {
                    coeffs[d][entry.output] += c;
                }
            }
            raw.push(ExpPolyTerm::new(exponent, coeffs));
        });
        Ok(Self::canonicalize(map.dim(), raw))
    }
}

pub(crate) fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Calls `f` on every index tuple of the cartesian product `0..lens[0] × …`.
pub(crate) fn for_each_tuple(lens: &[usize], mut f: impl FnMut(&[usize])) {
    if lens.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; lens.len()];
    loop {
        f(&idx);
        let mut pos = lens.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < lens[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
}

impl Add for &ExpPolySum {
    type Output = ExpPolySum;

    fn add(self, rhs: &ExpPolySum) -> ExpPolySum {
        ExpPolySum::canonicalize(self.dim, self.terms().chain(rhs.terms()).cloned())
    }
}

impl Sub for &ExpPolySum {
    type Output = ExpPolySum;

    fn sub(self, rhs: &ExpPolySum) -> ExpPolySum {
        self + &(-rhs)
    }
}

impl Neg for &ExpPolySum {
    type Output = ExpPolySum;

    fn neg(self) -> ExpPolySum {
        self.scale(C64::new(-1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use approx::assert_relative_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn cancellation_gives_empty_sum() {
        let a = ExpPolySum::scalar(c(-1.0), &[ONE]);
        let b = ExpPolySum::scalar(c(-1.0), &[c(-1.0)]);
        assert!((&a + &b).is_zero());
    }

    #[test]
    fn merge_adds_coefficientwise() {
        let a = ExpPolySum::scalar(c(-1.0), &[c(0.0), c(2.0)]);
        let b = ExpPolySum::scalar(c(-1.0), &[c(3.0), c(0.0)]);
        let s = &a + &b;
        assert_eq!(s.len(), 1);
        let term = s.term(c(-1.0)).unwrap();
        assert_eq!(term.coeffs.len(), 2);
        assert_eq!(term.coeffs[0][0], c(3.0));
        assert_eq!(term.coeffs[1][0], c(2.0));
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let s = ExpPolySum::scalar(c(-2.0), &[c(1.0), c(0.0), c(0.0)]);
        assert_eq!(s.max_degree(), 0);
    }

    #[test]
    fn evaluation_examples() {
        let one = ExpPolySum::scalar(c(0.0), &[ONE]);
        assert_eq!(one.eval(5.0)[0], ONE);
        let te = ExpPolySum::scalar(c(-1.0), &[c(0.0), ONE]);
        assert_relative_eq!(te.eval(1.0)[0].re, (-1.0f64).exp(), epsilon = 1e-15);
        let euler = ExpPolySum::scalar(C64::new(0.0, 1.0), &[ONE]);
        let v = euler.eval(std::f64::consts::PI)[0];
        assert_relative_eq!(v.re, -1.0, epsilon = 1e-15);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let e = ExpPolySum::scalar(c(-1.0), &[ONE]);
        assert!(e
            .derivative()
            .approx_eq(&ExpPolySum::scalar(c(-1.0), &[c(-1.0)]), 1e-15));
        let te2 = ExpPolySum::scalar(c(-2.0), &[c(0.0), ONE]);
        let expected = ExpPolySum::scalar(c(-2.0), &[c(1.0), c(-2.0)]);
        assert!(te2.derivative().approx_eq(&expected, 1e-15));
    }

    #[test]
    fn square_map_adds_exponents_and_degrees() {
        let sq = MultiLinearMap::scalar_power(2);
        let e1 = ExpPolySum::scalar(c(-1.0), &[ONE]);
        let out = ExpPolySum::mul_apply(&sq, &[&e1, &e1]).unwrap();
        assert!(out.approx_eq(&ExpPolySum::scalar(c(-2.0), &[ONE]), 1e-15));

        let te1 = ExpPolySum::scalar(c(-1.0), &[c(0.0), ONE]);
        let e2 = ExpPolySum::scalar(c(-2.0), &[ONE]);
        let out = ExpPolySum::mul_apply(&sq, &[&te1, &e2]).unwrap();
        assert!(out.approx_eq(&ExpPolySum::scalar(c(-3.0), &[c(0.0), ONE]), 1e-15));
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let sq = MultiLinearMap::scalar_power(2);
        let e1 = ExpPolySum::scalar(c(-1.0), &[ONE]);
        assert_eq!(
            ExpPolySum::mul_apply(&sq, &[&e1]),
            Err(ClassError::ArityMismatch {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn class_membership() {
        let s = &ExpPolySum::scalar(C64::new(-1.0, 2.0), &[ONE])
            + &ExpPolySum::scalar(C64::new(-1.0, -2.0), &[ONE]);
        assert!(s.in_class(-1.0));
        assert!(!s.in_class(-2.0));
        assert_eq!(s.real_part(), Some(-1.0));
        assert!(ExpPolySum::zero(1).in_class(-7.0));
    }

    #[test]
    fn tuple_enumeration_covers_product() {
        let mut seen = Vec::new();
        for_each_tuple(&[2, 3], |t| seen.push(t.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[5], vec![1, 2]);
        let mut none = 0;
        for_each_tuple(&[2, 0], |_| none += 1);
        assert_eq!(none, 0);
    }
}
