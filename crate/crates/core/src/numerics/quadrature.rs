//! Quadrature of `∫_0^t e^{-(t-τ)A} p(𝓛̂(T_* + τ)) dτ` and comparison with
//! `(𝒵_A p)(𝓛̂(T_* + t))`.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::funclasses::{iterated_exp_zero, ClassError, LogPowerSum};
use crate::linalg::{operator_norm, ComplexMatrix, ComplexVec, C64};

use super::{fit_decay, DecayFit, NumericsError, Regressor, MIN_FIT_SAMPLES};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];
const MAX_DEPTH: usize = 48;
/// Kernel tails with `‖e^{-sA}‖` below this are dropped.
const KERNEL_CUTOFF: f64 = 1e-18;

fn gk15(
    f: &mut impl FnMut(f64) -> Result<ComplexVec, NumericsError>,
    a: f64,
    b: f64,
) -> Result<(ComplexVec, f64), NumericsError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let center = f(c)?;
    let mut kronrod = &center * C64::from(WGK[7]);
    let mut gauss = &center * C64::from(WG[3]);
    for i in 0..7 {
        let sum = f(c - h * XGK[i])? + f(c + h * XGK[i])?;
        kronrod += &sum * C64::from(WGK[i]);
        if i % 2 == 1 {
            gauss += &sum * C64::from(WG[i / 2]);
        }
    }
    let err = (&kronrod - &gauss).norm() * h;
    Ok((kronrod * C64::from(h), err))
}

/// Adaptive Gauss–Kronrod 15-point quadrature of a vector integrand by
/// bisection. A subinterval is accepted when its error estimate is below
/// `max(abs_tol · share, rel_tol · |value|)`, `share` being its fraction of
/// `[a, b]`.
pub fn adaptive_gk15(
    mut f: impl FnMut(f64) -> Result<ComplexVec, NumericsError>,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<ComplexVec, NumericsError> {
    let mut total: Option<ComplexVec> = None;
    let mut stack = vec![(a, b, 0usize)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = gk15(&mut f, lo, hi)?;
        let share = (hi - lo) / (b - a);
        if err <= (abs_tol * share).max(rel_tol * value.norm()) {
            total = Some(match total {
                Some(t) => t + value,
                None => value,
            });
        } else if depth >= MAX_DEPTH {
            return Err(NumericsError::Quadrature { a: lo, b: hi });
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(total.expect("at least one interval"))
}

/// `t ↦ ∫_0^t e^{-(t-τ)A} p(𝓛̂(T_* + τ)) dτ`, integrated in `s = t - τ` over
/// dyadic panels `[0, 1/8], [1/8, 1/4], …` so kernel evaluations repeat
/// across different `t`.
#[derive(Debug, Clone)]
pub struct KernelQuadrature {
    a: ComplexMatrix,
    p: LogPowerSum,
    t_star: f64,
    tol: f64,
}

type KernelCache = HashMap<u64, ComplexMatrix>;

impl KernelQuadrature {
    /// Requires `T_* > E_{k+1}(0)` for the depth `k` of `p`.
    pub fn new(
        a: ComplexMatrix,
        p: LogPowerSum,
        t_star: f64,
        tol: f64,
    ) -> Result<Self, NumericsError> {
        let bound = iterated_exp_zero(p.depth() + 1);
        if !(t_star > bound) {
            return Err(ClassError::Domain {
                depth: p.depth() + 1,
                t: t_star,
                bound,
            }
            .into());
        }
        Ok(KernelQuadrature { a, p, t_star, tol })
    }

    fn kernel<'c>(&self, s: f64, cache: &'c mut KernelCache) -> &'c ComplexMatrix {
        cache
            .entry(s.to_bits())
            .or_insert_with(|| (&self.a * C64::from(-s)).exp())
    }

    fn integral_cached(
        &self,
        t: f64,
        scale: f64,
        cache: &mut KernelCache,
    ) -> Result<ComplexVec, NumericsError> {
        let mut total = ComplexVec::zeros(self.p.dim());
        if t <= 0.0 {
            return Ok(total);
        }
        let mut edges = vec![0.0];
        let mut e = 0.125;
        while e < t {
            edges.push(e);
            e *= 2.0;
        }
        edges.push(t);
        let abs_tol = self.tol * scale.max(f64::MIN_POSITIVE);
        for w in edges.windows(2) {
            if operator_norm(self.kernel(w[0], cache)) < KERNEL_CUTOFF {
                break;
            }
            let share = (w[1] - w[0]) / t;
            let part = adaptive_gk15(
                |s| {
                    let f = self.p.eval(self.t_star + t - s)?;
                    Ok(self.kernel(s, cache) * f)
                },
                w[0],
                w[1],
                abs_tol * share,
                self.tol,
            )?;
            total += part;
        }
        Ok(total)
    }

    pub fn integral(&self, t: f64) -> Result<ComplexVec, NumericsError> {
        let scale = self.p.eval(self.t_star + t)?.norm();
        self.integral_cached(t, scale, &mut KernelCache::new())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub times: Vec<f64>,
    /// `|∫_0^t e^{-(t-τ)A} p(𝓛̂(T_*+τ)) dτ - (𝒵_A p)(𝓛̂(T_*+t))|`.
    pub deviations: Vec<f64>,
    /// Power-law fit of the deviation against `ln(T_* + t)`; `None` when
    /// fewer than eight deviations are positive.
    pub fit: Option<DecayFit>,
}

impl LemmaCheck {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().copied().fold(0.0, f64::max)
    }
}

/// Compare the variation-of-constants integral with `𝒵_A p` on `t_grid`.
/// Grid points are processed in parallel with one kernel cache per worker.
pub fn verify_lemma_newplem(
    a: &ComplexMatrix,
    p: &LogPowerSum,
    t_star: f64,
    t_grid: &[f64],
    quad_tol: f64,
) -> Result<LemmaCheck, NumericsError> {
    let quad = KernelQuadrature::new(a.clone(), p.clone(), t_star, quad_tol)?;
    let z = p.op_za(a)?;
    let deviations: Vec<f64> = t_grid
        .par_iter()
        .map_init(KernelCache::new, |cache, &t| {
            let target = z.eval(t_star + t)?;
            let value = quad.integral_cached(t, target.norm(), cache)?;
            Ok((value - target).norm())
        })
        .collect::<Result<_, NumericsError>>()?;
    let shifted: Vec<f64> = t_grid.iter().map(|t| t_star + t).collect();
    let positive = deviations.iter().filter(|d| **d > 0.0).count();
    let fit = if positive == deviations.len() && positive >= MIN_FIT_SAMPLES {
        let window = (shifted[0], *shifted.last().unwrap());
        Some(fit_decay(
            &shifted,
            &deviations,
            Regressor::LogLadder(0),
            Some(window),
        )?)
    } else {
        None
    };
    Ok(LemmaCheck {
        times: t_grid.to_vec(),
        deviations,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rmat, ONE};

    fn geometric(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn gk15_is_exact_for_polynomials() {
        let v = adaptive_gk15(
            |x| Ok(ComplexVec::from_element(1, C64::from(x.powi(5) - 2.0 * x))),
            0.0,
            2.0,
            1e-14,
            1e-14,
        )
        .unwrap();
        assert!((v[0].re - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn inverse_time_forcing() {
        let p = LogPowerSum::scalar_monomial(&[0.0, -1.0], ONE);
        let check =
            verify_lemma_newplem(&rmat(&[&[1.0]]), &p, 2.0, &geometric(50.0, 1e4, 12), 1e-12)
                .unwrap();
        let fit = check.fit.unwrap();
        assert!(fit.exponent > 1.3, "{}", fit.exponent);
    }

    #[test]
    fn zero_forcing() {
        let p = LogPowerSum::zero(1, 0);
        let check = verify_lemma_newplem(&rmat(&[&[1.0]]), &p, 2.0, &[1.0, 5.0], 1e-12).unwrap();
        assert_eq!(check.max_deviation(), 0.0);
        assert!(check.fit.is_none());
    }

    #[test]
    fn integral_inequality_ratio_stays_bounded() {
        let p = LogPowerSum::scalar_monomial(&[0.0, 0.0, -1.0], ONE);
        let quad = KernelQuadrature::new(rmat(&[&[1.0]]), p, 20.0, 1e-10).unwrap();
        let ratios: Vec<f64> = geometric(0.5, 1e4, 15)
            .into_iter()
            .map(|t| quad.integral(t).unwrap()[0].re * (20.0 + t).ln())
            .collect();
        let max = ratios.iter().copied().fold(0.0, f64::max);
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0 && max / min < 1e3);
    }
}
