use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::key::ExponentKey;
use crate::linalg::{shifted, ComplexMatrix, ComplexVec, Factorized, C64, ONE, ZERO};

use super::exppoly::for_each_tuple;
use super::ladder::{ladder_eval, LadderPoint};
use super::{ClassError, MultiLinearMap, CLASS_TOL, TRIM_REL};

/// Exponent vector `(α_{-1}, α_0, …, α_k)` of a ladder monomial `z^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentVector(Vec<C64>);

impl ExponentVector {
    /// Components in ladder order starting at index `-1`; needs at least one.
    pub fn new(components: Vec<C64>) -> Self {
        assert!(!components.is_empty(), "exponent vector needs depth >= -1");
        ExponentVector(components)
    }

    pub fn from_real(components: &[f64]) -> Self {
        Self::new(components.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(depth: i32) -> Self {
        Self::new(vec![ZERO; (depth + 2) as usize])
    }

    pub fn depth(&self) -> i32 {
        self.0.len() as i32 - 2
    }

    /// `α_j` for `-1 ≤ j ≤ depth`.
    pub fn get(&self, j: i32) -> C64 {
        self.0[(j + 1) as usize]
    }

    pub(crate) fn get_mut(&mut self, j: i32) -> &mut C64 {
        &mut self.0[(j + 1) as usize]
    }

    pub fn components(&self) -> &[C64] {
        &self.0
    }

    pub fn padded(&self, depth: i32) -> Self {
        let mut c = self.0.clone();
        c.resize((depth + 2) as usize, ZERO);
        ExponentVector(c)
    }

    pub fn conj(&self) -> Self {
        ExponentVector(self.0.iter().map(|z| z.conj()).collect())
    }

    pub(crate) fn key(&self) -> Vec<ExponentKey> {
        self.0.iter().map(|&z| ExponentKey::of(z)).collect()
    }

    /// Membership in `𝓔(m, k, μ)`: `Re α_j = 0` for `-1 ≤ j < m` and `Re α_m = μ`.
    pub fn in_class(&self, m: i32, mu: f64) -> bool {
        if m > self.depth() {
            return false;
        }
        let close = |x: f64, y: f64| (x - y).abs() <= CLASS_TOL * y.abs().max(1.0);
        (-1..m).all(|j| close(self.get(j).re, 0.0)) && close(self.get(m).re, mu)
    }

    /// `z^α` at a ladder point, one factor per component so large oscillatory
    /// phases are not summed before exponentiation.
    pub fn monomial_at(&self, point: &LadderPoint) -> C64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != ZERO)
            .map(|(i, a)| (a * point.log_value(i as i32 - 1)).exp())
            .product()
    }
}

impl Add for &ExponentVector {
    type Output = ExponentVector;

    fn add(self, rhs: &ExponentVector) -> ExponentVector {
        assert_eq!(self.0.len(), rhs.0.len(), "exponent depth");
        ExponentVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, z) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{z}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogPowerTerm {
    pub exponent: ExponentVector,
    pub coeff: ComplexVec,
}

impl LogPowerTerm {
    pub fn new(exponent: ExponentVector, coeff: ComplexVec) -> Self {
        LogPowerTerm { exponent, coeff }
    }
}

/// Finite sum `Σ_α z^α ξ_α` over ladder variables of a fixed depth.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPowerSum {
    dim: usize,
    depth: i32,
    terms: BTreeMap<Vec<ExponentKey>, LogPowerTerm>,
}

impl LogPowerSum {
    pub fn zero(dim: usize, depth: i32) -> Self {
        assert!(depth >= -1);
        LogPowerSum {
            dim,
            depth,
            terms: BTreeMap::new(),
        }
    }

    /// Merge equal exponent vectors and drop negligible coefficients (see
    /// [`TRIM_REL`]). Every exponent vector must have depth `depth`.
    pub fn canonicalize(
        dim: usize,
        depth: i32,
        raw: impl IntoIterator<Item = LogPowerTerm>,
    ) -> Result<Self, ClassError> {
        let mut acc: BTreeMap<Vec<ExponentKey>, (LogPowerTerm, f64)> = BTreeMap::new();
        for term in raw {
            if term.exponent.depth() != depth {
                return Err(ClassError::DepthMismatch {
                    expected: depth,
                    got: term.exponent.depth(),
                });
            }
            if term.coeff.len() != dim {
                return Err(ClassError::DimensionMismatch {
                    expected: dim,
                    got: term.coeff.len(),
                });
            }
            let norm = term.coeff.norm();
            match acc.entry(term.exponent.key()) {
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    let (existing, scale) = slot.get_mut();
                    existing.coeff += term.coeff;
                    *scale = scale.max(norm);
                }
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert((term, norm));
                }
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, (term, scale))| term.coeff.norm() > TRIM_REL * scale)
            .map(|(k, (term, _))| (k, term))
            .collect();
        Ok(LogPowerSum { dim, depth, terms })
    }

    fn rebuild(&self, raw: impl IntoIterator<Item = LogPowerTerm>) -> Self {
        Self::canonicalize(self.dim, self.depth, raw).expect("operator preserves depth")
    }

    pub fn monomial(exponent: ExponentVector, coeff: ComplexVec) -> Self {
        let (dim, depth) = (coeff.len(), exponent.depth());
        Self::canonicalize(dim, depth, [LogPowerTerm::new(exponent, coeff)])
            .expect("single term has consistent depth")
    }

    /// Scalar monomial with real exponent components.
    pub fn scalar_monomial(exponent: &[f64], coeff: C64) -> Self {
        Self::monomial(
            ExponentVector::from_real(exponent),
            ComplexVec::from_element(1, coeff),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> i32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &LogPowerTerm> {
        self.terms.values()
    }

    pub fn coefficient(&self, exponent: &ExponentVector) -> Option<&ComplexVec> {
        self.terms.get(&exponent.key()).map(|t| &t.coeff)
    }

    pub(crate) fn keyed_terms(&self) -> impl Iterator<Item = (&Vec<ExponentKey>, &LogPowerTerm)> {
        self.terms.iter()
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.terms().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    /// Evaluate `p(𝓛̂_k(t))`. Requires `t > E_{k+1}(0)`.
    pub fn eval(&self, t: f64) -> Result<ComplexVec, ClassError> {
        let point = ladder_eval(self.depth + 1, t)?;
        Ok(self.eval_at(&point))
    }

    /// Evaluate at a precomputed ladder point of depth at least `depth`.
    pub fn eval_at(&self, point: &LadderPoint) -> ComplexVec {
        assert!(point.depth() >= self.depth, "ladder point too shallow");
        self.terms().fold(ComplexVec::zeros(self.dim), |acc, term| {
            acc + &term.coeff * term.exponent.monomial_at(point)
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        self.rebuild(
            self.terms()
                .map(|t| LogPowerTerm::new(t.exponent.clone(), &t.coeff * c)),
        )
    }

    pub fn mat_mul(&self, m: &ComplexMatrix) -> Self {
        Self::canonicalize(
            m.nrows(),
            self.depth,
            self.terms()
                .map(|t| LogPowerTerm::new(t.exponent.clone(), m * &t.coeff)),
        )
        .expect("depth preserved")
    }

    pub fn conj(&self) -> Self {
        self.rebuild(
            self.terms()
                .map(|t| LogPowerTerm::new(t.exponent.conj(), t.coeff.map(|z| z.conj()))),
        )
    }

    /// Multiply by `z_j^{c}`.
    pub fn mul_ladder_power(&self, j: i32, c: C64) -> Result<Self, ClassError> {
        self.check_index(j)?;
        Ok(self.rebuild(self.terms().map(|t| {
            let mut e = t.exponent.clone();
            *e.get_mut(j) += c;
            LogPowerTerm::new(e, t.coeff.clone())
        })))
    }

    fn check_index(&self, j: i32) -> Result<(), ClassError> {
        if j < -1 || j > self.depth {
            return Err(ClassError::IndexOutOfRange {
                index: j,
                depth: self.depth,
            });
        }
        Ok(())
    }

    /// `(𝓜_j p)(z) = Σ α_j z^α ξ_α`.
    pub fn op_m(&self, j: i32) -> Result<Self, ClassError> {
        self.check_index(j)?;
        Ok(self.rebuild(
            self.terms()
                .map(|t| LogPowerTerm::new(t.exponent.clone(), &t.coeff * t.exponent.get(j))),
        ))
    }

    /// `(𝓡 p)(z) = Σ_{j=0}^k z_0^{-1}⋯z_j^{-1} (𝓜_j p)(z)`: the part of
    /// `d/dt p(𝓛̂(t))` coming from the logarithmic variables.
    pub fn op_r(&self) -> Result<Self, ClassError> {
        if self.depth < 0 {
            return Err(ClassError::DepthTooSmall);
        }
        let mut raw = Vec::new();
        for t in self.terms() {
            for j in 0..=self.depth {
                let a = t.exponent.get(j);
                if a == ZERO {
                    continue;
                }
                let mut e = t.exponent.clone();
                for i in 0..=j {
                    *e.get_mut(i) -= ONE;
                }
                raw.push(LogPowerTerm::new(e, &t.coeff * a));
            }
        }
        Ok(self.rebuild(raw))
    }

    /// `d/dt p(𝓛̂(t)) = (𝓜_{-1} p + 𝓡 p)(𝓛̂(t))`.
    pub fn time_derivative(&self) -> Result<Self, ClassError> {
        Ok(&self.op_m(-1)? + &self.op_r()?)
    }

    /// `(𝒵_A p)(z) = Σ z^α (A + α_{-1} I)^{-1} ξ_α`, defined when every
    /// `α_{-1}` is purely imaginary. Inverses are factored once per distinct
    /// `α_{-1}`.
    pub fn op_za(&self, a: &ComplexMatrix) -> Result<Self, ClassError> {
        let mut cache: HashMap<ExponentKey, Factorized> = HashMap::new();
        let mut raw = Vec::with_capacity(self.terms.len());
        for t in self.terms() {
            let shift = t.exponent.get(-1);
            if shift.re.abs() > CLASS_TOL * shift.norm().max(1.0) {
                return Err(ClassError::NonImaginaryShift { re: shift.re });
            }
            let key = ExponentKey::of(shift);
            let lu = match cache.get(&key) {
                Some(lu) => lu,
                None => {
                    let lu = Factorized::new(&shifted(a, shift), 1e-14)
                        .ok_or(ClassError::SingularShift { shift })?;
                    cache.entry(key).or_insert(lu)
                }
            };
            raw.push(LogPowerTerm::new(t.exponent.clone(), lu.solve(&t.coeff)));
        }
        Ok(Self::canonicalize(a.nrows(), self.depth, raw).expect("depth preserved"))
    }

    /// `(A + 𝓜_{-1}) p`.
    pub fn apply_shifted(&self, a: &ComplexMatrix) -> Self {
        self.rebuild(self.terms().map(|t| {
            let c = a * &t.coeff + &t.coeff * t.exponent.get(-1);
            LogPowerTerm::new(t.exponent.clone(), c)
        }))
    }

    /// Zero-pad every exponent vector to depth `depth`.
    pub fn embed_depth(&self, depth: i32) -> Result<Self, ClassError> {
        if depth < self.depth {
            return Err(ClassError::EmbedDepth {
                from: self.depth,
                to: depth,
            });
        }
        if depth == self.depth {
            return Ok(self.clone());
        }
        Self::canonicalize(
            self.dim,
            depth,
            self.terms()
                .map(|t| LogPowerTerm::new(t.exponent.padded(depth), t.coeff.clone())),
        )
    }

    /// Every term lies in `𝓔(m, k, μ)`. The zero sum is in every class.
    pub fn in_class(&self, m: i32, mu: f64) -> bool {
        self.terms().all(|t| t.exponent.in_class(m, mu))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.dim != other.dim || self.depth != other.depth || self.len() != other.len() {
            return false;
        }
        let scale = self
            .max_coeff_norm()
            .max(other.max_coeff_norm())
            .max(f64::MIN_POSITIVE);
        self.terms.iter().all(|(k, a)| {
            other
                .terms
                .get(k)
                .is_some_and(|b| (&a.coeff - &b.coeff).norm() <= tol * scale)
        })
    }

    /// `𝒢(p_1, …, p_m)`: exponent vectors add, coefficients combine through
    /// the map. Arguments are embedded to their common maximal depth.
    pub fn mul_apply(map: &MultiLinearMap, args: &[&LogPowerSum]) -> Result<Self, ClassError> {
        map.check_args(args.iter().map(|a| a.dim))?;
        let depth = args.iter().map(|a| a.depth).max().unwrap_or(-1);
        if args.iter().any(|a| a.is_zero()) {
            return Ok(Self::zero(map.dim(), depth));
        }
        let embedded: Vec<LogPowerSum> = args
            .iter()
            .map(|a| a.embed_depth(depth))
            .collect::<Result<_, _>>()?;
        let term_lists: Vec<Vec<&LogPowerTerm>> =
            embedded.iter().map(|a| a.terms().collect()).collect();
        let lens: Vec<usize> = term_lists.iter().map(Vec::len).collect();
        let mut raw = Vec::new();
        for_each_tuple(&lens, |choice| {
            let chosen: Vec<&LogPowerTerm> = choice
                .iter()
                .enumerate()
                .map(|(l, &i)| term_lists[l][i])
                .collect();
            let exponent = chosen[1..]
                .iter()
                .fold(chosen[0].exponent.clone(), |acc, t| &acc + &t.exponent);
            let coeffs: Vec<&ComplexVec> = chosen.iter().map(|t| &t.coeff).collect();
            let value = map.apply(&coeffs).expect("arguments checked");
            raw.push(LogPowerTerm::new(exponent, value));
        });
        Self::canonicalize(map.dim(), depth, raw)
    }
}

impl Add for &LogPowerSum {
    type Output = LogPowerSum;

    /// Sum at the larger of the two depths.
    fn add(self, rhs: &LogPowerSum) -> LogPowerSum {
        assert_eq!(self.dim, rhs.dim, "dimension");
        let depth = self.depth.max(rhs.depth);
        let a = self.embed_depth(depth).expect("larger depth");
        let b = rhs.embed_depth(depth).expect("larger depth");
        LogPowerSum::canonicalize(self.dim, depth, a.terms().chain(b.terms()).cloned())
            .expect("common depth")
    }
}

impl Sub for &LogPowerSum {
    type Output = LogPowerSum;

    fn sub(self, rhs: &LogPowerSum) -> LogPowerSum {
        self + &(-rhs)
    }
}

impl Neg for &LogPowerSum {
    type Output = LogPowerSum;

    fn neg(self) -> LogPowerSum {
        self.scale(C64::new(-1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rmat;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const I: C64 = C64::new(0.0, 1.0);

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn evaluation_examples() {
        let inv_t = LogPowerSum::scalar_monomial(&[0.0, -1.0, 0.0], ONE);
        assert_relative_eq!(inv_t.eval(4.0).unwrap()[0].re, 0.25, epsilon = 1e-16);

        let eit = LogPowerSum::monomial(
            ExponentVector::new(vec![I, ZERO]),
            ComplexVec::from_element(1, ONE),
        );
        let v = eit.eval(PI).unwrap()[0];
        assert_relative_eq!(v.re, -1.0, epsilon = 1e-15);
        assert!(v.im.abs() < 1e-15);

        // (ln t)^i with ln t = e^π: modulus 1, argument π.
        let p = LogPowerSum::monomial(
            ExponentVector::new(vec![ZERO, ZERO, I]),
            ComplexVec::from_element(1, ONE),
        );
        let t = PI.exp().exp();
        let v = p.eval(t).unwrap()[0];
        assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(v.arg().abs(), PI, epsilon = 1e-12);
    }

    #[test]
    fn evaluation_domain_is_strict() {
        let p = LogPowerSum::scalar_monomial(&[0.0, 0.0, -1.0], ONE);
        assert!(matches!(
            p.eval(std::f64::consts::E),
            Err(ClassError::Domain { .. })
        ));
        assert!(p.eval(3.0).is_ok());
    }

    #[test]
    fn op_m_examples() {
        let inv_t = LogPowerSum::scalar_monomial(&[0.0, -1.0], ONE);
        assert!(inv_t.op_m(0).unwrap().approx_eq(&inv_t.scale(c(-1.0)), 0.0));
        let p = LogPowerSum::monomial(
            ExponentVector::new(vec![I, c(-1.0)]),
            ComplexVec::from_element(1, ONE),
        );
        assert!(p.op_m(-1).unwrap().approx_eq(&p.scale(I), 0.0));
        assert!(LogPowerSum::zero(1, 2).op_m(1).unwrap().is_zero());
        assert!(matches!(
            inv_t.op_m(1),
            Err(ClassError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn op_r_examples() {
        let inv_t = LogPowerSum::scalar_monomial(&[0.0, -1.0], ONE);
        let expected = LogPowerSum::scalar_monomial(&[0.0, -2.0], c(-1.0));
        assert!(inv_t.op_r().unwrap().approx_eq(&expected, 0.0));

        let p = LogPowerSum::monomial(
            ExponentVector::new(vec![ZERO, ZERO, I]),
            ComplexVec::from_element(1, ONE),
        );
        let expected = LogPowerSum::monomial(
            ExponentVector::new(vec![ZERO, c(-1.0), I - ONE]),
            ComplexVec::from_element(1, I),
        );
        assert!(p.op_r().unwrap().approx_eq(&expected, 0.0));

        let shallow = LogPowerSum::monomial(
            ExponentVector::new(vec![I]),
            ComplexVec::from_element(1, ONE),
        );
        assert_eq!(shallow.op_r(), Err(ClassError::DepthTooSmall));
    }

    #[test]
    fn op_za_examples() {
        let constant = LogPowerSum::scalar_monomial(&[0.0, 0.0], ONE);
        let out = constant.op_za(&rmat(&[&[2.0]])).unwrap();
        assert_relative_eq!(out.terms().next().unwrap().coeff[0].re, 0.5);

        let p = LogPowerSum::monomial(
            ExponentVector::new(vec![I, ZERO]),
            ComplexVec::from_element(1, ONE),
        );
        let out = p.op_za(&rmat(&[&[1.0]])).unwrap();
        let v = out.terms().next().unwrap().coeff[0];
        assert_relative_eq!(v.re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(v.im, -0.5, epsilon = 1e-15);

        let bad = LogPowerSum::scalar_monomial(&[-1.0, 0.0], ONE);
        assert!(matches!(
            bad.op_za(&rmat(&[&[1.0]])),
            Err(ClassError::NonImaginaryShift { .. })
        ));
        let singular = rmat(&[&[0.0]]);
        assert!(matches!(
            constant.op_za(&singular),
            Err(ClassError::SingularShift { .. })
        ));
    }

    #[test]
    fn embed_examples() {
        let inv_t = LogPowerSum::scalar_monomial(&[0.0, -1.0], ONE);
        let deep = inv_t.embed_depth(2).unwrap();
        assert_eq!(deep.depth(), 2);
        let e = &deep.terms().next().unwrap().exponent;
        assert_eq!(e.components(), &[ZERO, c(-1.0), ZERO, ZERO]);
        assert_eq!(inv_t.embed_depth(0).unwrap(), inv_t);
        assert!(deep.embed_depth(1).is_err());
    }

    #[test]
    fn square_map_examples() {
        let sq = MultiLinearMap::scalar_power(2);
        let inv_t = LogPowerSum::scalar_monomial(&[0.0, -1.0], ONE);
        let out = LogPowerSum::mul_apply(&sq, &[&inv_t, &inv_t]).unwrap();
        assert!(out.approx_eq(&LogPowerSum::scalar_monomial(&[0.0, -2.0], ONE), 0.0));

        let p = &inv_t + &LogPowerSum::scalar_monomial(&[0.0, -2.0], ONE);
        let out = LogPowerSum::mul_apply(&sq, &[&p, &p]).unwrap();
        let expected = &(&LogPowerSum::scalar_monomial(&[0.0, -2.0], ONE)
            + &LogPowerSum::scalar_monomial(&[0.0, -3.0], c(2.0)))
            + &LogPowerSum::scalar_monomial(&[0.0, -4.0], ONE);
        assert!(out.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn class_membership() {
        let p = LogPowerSum::monomial(
            ExponentVector::new(vec![I, c(-1.0), c(3.0)]),
            ComplexVec::from_element(1, ONE),
        );
        assert!(p.in_class(0, -1.0));
        assert!(!p.in_class(1, 3.0));
        let q = LogPowerSum::monomial(
            ExponentVector::new(vec![I, I, c(-0.5), c(2.0)]),
            ComplexVec::from_element(1, ONE),
        );
        assert!(q.in_class(1, -0.5));
        assert!(!q.in_class(2, 2.0));
    }
}
