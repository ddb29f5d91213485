use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::funclasses::{
    ladder_eval, ExponentVector, LadderPoint, LogPowerSum, LogPowerTerm, TRIM_REL,
};
use crate::key::real_key;
use crate::linalg::{ComplexVec, C64, ONE};

use super::{ConjugationSymmetric, Phase, RealifyError};

type TermKey = (Vec<i64>, Vec<i64>, Vec<Phase>);

/// `z^α · Π_{j=0}^{k} σ_j(ω_j z_j) · ξ` with real `α` (indices `-1..=k`),
/// frequencies `ω_j ≥ 0` and real `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLogTerm {
    pub exponent: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub phases: Vec<Phase>,
    pub coeff: DVector<f64>,
}

impl RealLogTerm {
    fn key(&self) -> TermKey {
        (
            self.exponent.iter().map(|&a| real_key(a)).collect(),
            self.frequencies.iter().map(|&w| real_key(w)).collect(),
            self.phases.clone(),
        )
    }

    fn factor_at(&self, point: &LadderPoint) -> f64 {
        let power: f64 = self
            .exponent
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(i, a)| a * point.log_value(i as i32 - 1))
            .sum::<f64>()
            .exp();
        let trig: f64 = self
            .frequencies
            .iter()
            .zip(&self.phases)
            .enumerate()
            .filter(|(_, (w, _))| **w != 0.0)
            .map(|(j, (w, phase))| phase.apply(w * point.value(j as i32)))
            .product();
        power * trig
    }
}

/// Real log-power sum of depth `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLogPower {
    dim: usize,
    depth: i32,
    terms: BTreeMap<TermKey, RealLogTerm>,
}

impl RealLogPower {
    /// Normalise every frequency to `ω ≥ 0` (sine factors absorb the sign),
    /// drop terms containing `sin(0)`, merge equal terms and trim negligible
    /// coefficients.
    pub fn canonicalize(
        dim: usize,
        depth: i32,
        raw: impl IntoIterator<Item = RealLogTerm>,
    ) -> Result<Self, RealifyError> {
        let width = (depth + 2) as usize;
        let mut acc: BTreeMap<TermKey, (RealLogTerm, f64)> = BTreeMap::new();
        'terms: for mut term in raw {
            if term.exponent.len() != width
                || term.frequencies.len() != width - 1
                || term.phases.len() != width - 1
                || term.coeff.len() != dim
            {
                return Err(RealifyError::Shape(format!(
                    "depth {depth} needs {width} exponents and {} frequencies/phases of dimension {dim}",
                    width - 1
                )));
            }
            for j in 0..width - 1 {
                if term.frequencies[j] < 0.0 {
                    term.frequencies[j] = -term.frequencies[j];
                    if term.phases[j] == Phase::Sin {
                        term.coeff = -term.coeff;
                    }
                }
                if real_key(term.frequencies[j]) == 0 {
                    if term.phases[j] == Phase::Sin {
                        continue 'terms;
                    }
                    term.frequencies[j] = 0.0;
                }
            }
            let norm = term.coeff.norm();
            match acc.get_mut(&term.key()) {
                Some((existing, scale)) => {
                    existing.coeff += &term.coeff;
                    *scale = scale.max(norm);
                }
                None => {
                    acc.insert(term.key(), (term, norm));
                }
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, (t, scale))| t.coeff.norm() > TRIM_REL * scale)
            .map(|(k, (t, _))| (k, t))
            .collect();
        Ok(RealLogPower { dim, depth, terms })
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

    pub fn terms(&self) -> impl Iterator<Item = &RealLogTerm> {
        self.terms.values()
    }

    /// Evaluate at `t > E_k(0)`.
    pub fn eval(&self, t: f64) -> Result<DVector<f64>, RealifyError> {
        let point = ladder_eval(self.depth, t)?;
        Ok(self.eval_at(&point))
    }

    pub fn eval_at(&self, point: &LadderPoint) -> DVector<f64> {
        self.terms().fold(DVector::zeros(self.dim), |acc, term| {
            acc + &term.coeff * term.factor_at(point)
        })
    }

    /// Membership in the real class with decay index `m`: `α_j = 0` for
    /// `-1 ≤ j ≤ m`.
    pub fn in_class(&self, m: i32) -> bool {
        m <= self.depth
            && self.terms().all(|t| {
                t.exponent[..=(m + 1) as usize]
                    .iter()
                    .all(|a| a.abs() <= crate::funclasses::CLASS_TOL)
            })
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let scale = self
            .terms()
            .chain(other.terms())
            .map(|t| t.coeff.norm())
            .fold(f64::MIN_POSITIVE, f64::max);
        self.dim == other.dim
            && self.depth == other.depth
            && self.terms.len() == other.terms.len()
            && self.terms.iter().all(|(k, a)| {
                other
                    .terms
                    .get(k)
                    .is_some_and(|b| (&a.coeff - &b.coeff).norm() <= tol * scale)
            })
    }
}

/// Real form of a conjugation-symmetric log-power sum of depth `k`.
///
/// `Im α_j` becomes a frequency on `z_{j+1}`. The result has depth `k + 1`,
/// or `k` when no term has an imaginary part in its last component.
pub fn to_real_logpower(p: &LogPowerSum) -> Result<RealLogPower, RealifyError> {
    if !p.is_conjugation_symmetric() {
        return Err(RealifyError::NotSymmetric);
    }
    let k = p.depth();
    let last_oscillates = p.terms().any(|t| real_key(t.exponent.get(k).im) != 0);
    let depth = if last_oscillates { k + 1 } else { k };
    let width = (depth + 2) as usize;
    let mut raw = Vec::new();
    for (key, term) in p.keyed_terms() {
        let conj: Vec<_> = key.iter().map(|c| c.conj()).collect();
        if *key < conj {
            continue;
        }
        let mut exponent: Vec<f64> = term.exponent.components().iter().map(|a| a.re).collect();
        exponent.resize(width, 0.0);
        let mut frequencies: Vec<f64> = term.exponent.components().iter().map(|a| a.im).collect();
        frequencies.resize(width - 1, 0.0);
        if *key == conj {
            raw.push(RealLogTerm {
                exponent,
                frequencies: vec![0.0; width - 1],
                phases: vec![Phase::Cos; width - 1],
                coeff: term.coeff.map(|z| z.re),
            });
            continue;
        }
        // 2 Re(ξ Π_j (cos θ_j + i sin θ_j)) expanded over the set S of sine
        // factors: coefficient 2 Re(i^{|S|} ξ).
        let active: Vec<usize> = (0..width - 1)
            .filter(|&j| real_key(frequencies[j]) != 0)
            .collect();
        for mask in 0u64..(1 << active.len()) {
            let mut phases = vec![Phase::Cos; width - 1];
            for (bit, &j) in active.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    phases[j] = Phase::Sin;
                }
            }
            let rotation = C64::i().powu(mask.count_ones());
            raw.push(RealLogTerm {
                exponent: exponent.clone(),
                frequencies: frequencies.clone(),
                phases,
                coeff: term.coeff.map(|z| 2.0 * (rotation * z).re),
            });
        }
    }
    RealLogPower::canonicalize(p.dim(), depth, raw)
}

/// Complex form of a real log-power sum: `cos(ω z_j) = (z_{j-1}^{iω} + z_{j-1}^{-iω})/2`
/// and `sin(ω z_j) = (z_{j-1}^{iω} - z_{j-1}^{-iω})/(2i)`. The result has the
/// same depth and is conjugation-symmetric.
pub fn from_real_logpower(q: &RealLogPower) -> Result<LogPowerSum, RealifyError> {
    let depth = q.depth();
    let mut raw = Vec::new();
    for term in q.terms() {
        let base: Vec<C64> = term.exponent.iter().map(|&a| C64::new(a, 0.0)).collect();
        let active: Vec<usize> = (0..term.frequencies.len())
            .filter(|&j| term.frequencies[j] != 0.0)
            .collect();
        let coeff: ComplexVec = term.coeff.map(|x| C64::new(x, 0.0));
        for mask in 0u64..(1 << active.len()) {
            let mut exponent = base.clone();
            let mut weight = ONE;
            for (bit, &j) in active.iter().enumerate() {
                let negative = mask >> bit & 1 == 1;
                let w = term.frequencies[j];
                // z_{j-1} sits at position j in the exponent vector.
                exponent[j] += C64::new(0.0, if negative { -w } else { w });
                weight *= match (term.phases[j], negative) {
                    (Phase::Cos, _) => C64::new(0.5, 0.0),
                    (Phase::Sin, false) => C64::new(0.0, -0.5),
                    (Phase::Sin, true) => C64::new(0.0, 0.5),
                };
            }
            raw.push(LogPowerTerm::new(
                ExponentVector::new(exponent),
                &coeff * weight,
            ));
        }
    }
    Ok(LogPowerSum::canonicalize(q.dim(), depth, raw)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cvec;

    fn scalar(exponent: Vec<C64>, c: C64) -> LogPowerSum {
        LogPowerSum::monomial(ExponentVector::new(exponent), cvec(&[c]))
    }

    #[test]
    fn imaginary_power_of_log_becomes_cosine() {
        let zero = C64::new(0.0, 0.0);
        let p = &scalar(vec![zero, zero, C64::new(0.0, 1.0)], ONE)
            + &scalar(vec![zero, zero, C64::new(0.0, -1.0)], ONE);
        let r = to_real_logpower(&p).unwrap();
        assert_eq!((r.depth(), r.len()), (2, 1));
        let t = r.terms().next().unwrap();
        assert_eq!(t.frequencies, vec![0.0, 0.0, 1.0]);
        assert_eq!(t.phases[2], Phase::Cos);
        assert!((t.coeff[0] - 2.0).abs() < 1e-15);
        for x in [20.0_f64, 300.0, 1e5] {
            let expected = 2.0 * (x.ln().ln()).cos();
            assert!((r.eval(x).unwrap()[0] - expected).abs() < 1e-12);
            assert!((p.eval(x).unwrap()[0].re - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn real_exponents_keep_depth() {
        let p = LogPowerSum::scalar_monomial(&[0.0, -1.0, 2.0], C64::new(3.0, 0.0));
        let r = to_real_logpower(&p).unwrap();
        assert_eq!(r.depth(), 1);
        let t = r.terms().next().unwrap();
        assert_eq!(t.exponent, vec![0.0, -1.0, 2.0]);
        assert_eq!(t.coeff[0], 3.0);
        assert!(r.in_class(-1) && !r.in_class(0));
    }

    #[test]
    fn cosine_and_sine_factors_round_trip() {
        let q = RealLogPower::canonicalize(
            1,
            2,
            [RealLogTerm {
                exponent: vec![0.0, -0.5, 0.0, 1.0],
                frequencies: vec![2.0, 0.0, 3.0],
                phases: vec![Phase::Cos, Phase::Cos, Phase::Sin],
                coeff: DVector::from_element(1, 1.5),
            }],
        )
        .unwrap();
        let p = from_real_logpower(&q).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.is_conjugation_symmetric());
        let e = ExponentVector::new(vec![
            C64::new(0.0, 2.0),
            C64::new(-0.5, 0.0),
            C64::new(0.0, 3.0),
            C64::new(1.0, 0.0),
        ]);
        assert!((p.coefficient(&e).unwrap()[0] - C64::new(0.0, -1.5 / 4.0)).norm() < 1e-15);
        let back = to_real_logpower(&p).unwrap();
        assert!(back.approx_eq(&q, 1e-14));
        for x in [20.0, 1e3, 1e6] {
            let a = q.eval(x).unwrap()[0];
            let b = p.eval(x).unwrap()[0];
            assert!((a - b.re).abs() < 1e-12 * a.abs().max(1.0) && b.im.abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let zero = C64::new(0.0, 0.0);
        let p = scalar(vec![zero, C64::new(-1.0, 1.0)], ONE);
        assert_eq!(to_real_logpower(&p), Err(RealifyError::NotSymmetric));
    }
}
