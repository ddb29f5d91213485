use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::funclasses::{ExpPolySum, ExpPolyTerm, CLASS_TOL, TRIM_REL};
use crate::key::real_key;
use crate::linalg::{ComplexVec, C64};

use super::{ConjugationSymmetric, Phase, RealifyError};

/// `t^power · σ(ω t) · vector` with `ω ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SPolyTerm {
    pub power: usize,
    pub frequency: f64,
    pub phase: Phase,
    pub vector: DVector<f64>,
}

/// Real S-polynomial `Σ t^m (cos(ωt) Z + sin(ωt) W)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSPoly {
    dim: usize,
    terms: BTreeMap<(usize, i64, Phase), SPolyTerm>,
}

impl RealSPoly {
    /// Normalise frequencies to `ω ≥ 0` (a negative frequency flips the sign
    /// of a sine term), drop `sin(0·t)`, merge equal terms, trim negligible
    /// vectors.
    pub fn canonicalize(
        dim: usize,
        raw: impl IntoIterator<Item = SPolyTerm>,
    ) -> Result<Self, RealifyError> {
        let mut acc: BTreeMap<(usize, i64, Phase), (SPolyTerm, f64)> = BTreeMap::new();
        for mut term in raw {
            if term.vector.len() != dim {
                return Err(RealifyError::Shape(format!(
                    "vector of length {} in a sum of dimension {dim}",
                    term.vector.len()
                )));
            }
            if term.frequency < 0.0 {
                term.frequency = -term.frequency;
                if term.phase == Phase::Sin {
                    term.vector = -term.vector;
                }
            }
            let key = (term.power, real_key(term.frequency), term.phase);
            if key.1 == 0 {
                if term.phase == Phase::Sin {
                    continue;
                }
                term.frequency = 0.0;
            }
            let norm = term.vector.norm();
            match acc.get_mut(&key) {
                Some((existing, scale)) => {
                    existing.vector += &term.vector;
                    *scale = scale.max(norm);
                }
                None => {
                    acc.insert(key, (term, norm));
                }
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, (t, scale))| t.vector.norm() > TRIM_REL * scale)
            .map(|(k, (t, _))| (k, t))
            .collect();
        Ok(RealSPoly { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &SPolyTerm> {
        self.terms.values()
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        self.terms().fold(DVector::zeros(self.dim), |acc, term| {
            acc + &term.vector * (t.powi(term.power as i32) * term.phase.apply(term.frequency * t))
        })
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let scale = self
            .terms()
            .chain(other.terms())
            .map(|t| t.vector.norm())
            .fold(f64::MIN_POSITIVE, f64::max);
        self.dim == other.dim
            && self.terms.len() == other.terms.len()
            && self.terms.iter().all(|(k, a)| {
                other
                    .terms
                    .get(k)
                    .is_some_and(|b| (&a.vector - &b.vector).norm() <= tol * scale)
            })
    }
}

/// Fold each pair `c e^{iωt} + c̄ e^{-iωt}` into
/// `2 Re c · cos(ωt) - 2 Im c · sin(ωt)`.
pub fn to_real_spoly(s: &ExpPolySum) -> Result<RealSPoly, RealifyError> {
    if let Some(t) = s.terms().find(|t| t.exponent.re.abs() > CLASS_TOL) {
        return Err(RealifyError::NonzeroRealPart { re: t.exponent.re });
    }
    if !s.is_conjugation_symmetric() {
        return Err(RealifyError::NotSymmetric);
    }
    let mut raw = Vec::new();
    for (key, term) in s.keyed_terms() {
        let omega = term.exponent.im;
        for (power, c) in term.coeffs.iter().enumerate() {
            if key.is_real() {
                raw.push(SPolyTerm {
                    power,
                    frequency: 0.0,
                    phase: Phase::Cos,
                    vector: c.map(|z| z.re),
                });
            } else if key.im_sign() > 0 {
                raw.push(SPolyTerm {
                    power,
                    frequency: omega,
                    phase: Phase::Cos,
                    vector: c.map(|z| 2.0 * z.re),
                });
                raw.push(SPolyTerm {
                    power,
                    frequency: omega,
                    phase: Phase::Sin,
                    vector: c.map(|z| -2.0 * z.im),
                });
            }
        }
    }
    RealSPoly::canonicalize(s.dim(), raw)
}

/// Complex form of a real S-polynomial: `cos(ωt) = (e^{iωt} + e^{-iωt})/2`,
/// `sin(ωt) = (e^{iωt} - e^{-iωt})/(2i)`.
pub fn from_real_spoly(s: &RealSPoly) -> ExpPolySum {
    let mut raw = Vec::new();
    for term in s.terms() {
        let v: ComplexVec = term.vector.map(|x| C64::new(x, 0.0));
        let mut coeffs = vec![ComplexVec::zeros(s.dim()); term.power + 1];
        if term.frequency == 0.0 {
            coeffs[term.power] = v;
            raw.push(ExpPolyTerm::new(C64::new(0.0, 0.0), coeffs));
            continue;
        }
        let (plus, minus) = match term.phase {
            Phase::Cos => (C64::new(0.5, 0.0), C64::new(0.5, 0.0)),
            Phase::Sin => (C64::new(0.0, -0.5), C64::new(0.0, 0.5)),
        };
        for (sign, w) in [(1.0, plus), (-1.0, minus)] {
            let mut c = coeffs.clone();
            c[term.power] = &v * w;
            raw.push(ExpPolyTerm::new(C64::new(0.0, sign * term.frequency), c));
        }
    }
    ExpPolySum::canonicalize(s.dim(), raw)
}
