//! Remainder sampling, decay-exponent fits and resonant-constant fits.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{Expansion, Mode};
use crate::funclasses::ladder_eval;
use crate::linalg::{ComplexMatrix, ComplexVec, C64};

use super::{NumericsError, Trajectory};

/// Fits need at least this many usable samples.
pub const MIN_FIT_SAMPLES: usize = 8;
/// Remainders are clipped from below to keep logarithms finite.
const CLIP: f64 = 1e-300;
/// Default fit windows cover the last 40% of the sampled range.
const WINDOW_FRACTION: f64 = 0.4;

/// Abscissa of a decay fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regressor {
    /// `ln r` against `t`: exponential decay.
    Time,
    /// `ln r` against `ln L_m(t)`: decay in powers of `L_m`.
    LogLadder(i32),
}

impl Regressor {
    pub fn for_mode(mode: Mode) -> Self {
        match mode.m_star() {
            None => Regressor::Time,
            Some(m) => Regressor::LogLadder(m),
        }
    }

    pub fn x(self, t: f64) -> Result<f64, NumericsError> {
        Ok(match self {
            Regressor::Time => t,
            Regressor::LogLadder(m) => ladder_eval(m, t)?.log_value(m),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Minus the fitted slope.
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub regressor: Regressor,
    pub samples: usize,
}

fn default_window(times: &[f64]) -> (f64, f64) {
    let (a, b) = (times[0], *times.last().unwrap());
    (b - WINDOW_FRACTION * (b - a), b)
}

/// Least-squares slope of `ln value` against the regressor over `window`
/// (default: last 40% of the range).
pub fn fit_decay(
    times: &[f64],
    values: &[f64],
    regressor: Regressor,
    window: Option<(f64, f64)>,
) -> Result<DecayFit, NumericsError> {
    assert_eq!(times.len(), values.len());
    if times.is_empty() {
        return Err(NumericsError::WindowTooSmall {
            have: 0,
            need: MIN_FIT_SAMPLES,
        });
    }
    let window = window.unwrap_or_else(|| default_window(times));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(v > 0.0) {
            return Err(NumericsError::NonPositiveSample { t, value: v });
        }
        xs.push(regressor.x(t)?);
        ys.push(v.ln());
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(NumericsError::WindowTooSmall {
            have: xs.len(),
            need: MIN_FIT_SAMPLES,
        });
    }
    let count = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / count;
    let my = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(NumericsError::WindowTooSmall {
            have: 1,
            need: MIN_FIT_SAMPLES,
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit {
        exponent: -slope,
        intercept,
        r_squared,
        window,
        regressor,
        samples: xs.len(),
    })
}

/// `|y(t) - Σ_{k≤N} y_k(t)|` on the trajectory grid, together with the level
/// below which integration error dominates.
#[derive(Debug, Clone, PartialEq)]
pub struct RemainderSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `100 (rel_tol |y(t)| + abs_tol)`.
    pub floors: Vec<f64>,
}

impl RemainderSeries {
    /// [`fit_decay`] after dropping samples below the integration floor or
    /// below `100 ε` times the first remainder.
    pub fn fit(
        &self,
        regressor: Regressor,
        window: Option<(f64, f64)>,
    ) -> Result<DecayFit, NumericsError> {
        let first = self.values.first().copied().unwrap_or(0.0);
        let cut = 100.0 * f64::EPSILON * first;
        let (times, values): (Vec<f64>, Vec<f64>) = self
            .times
            .iter()
            .zip(&self.values)
            .zip(&self.floors)
            .filter(|((_, &v), &floor)| v > floor && v > cut)
            .map(|((&t, &v), _)| (t, v))
            .unzip();
        let window = window.unwrap_or_else(|| default_window(&self.times));
        fit_decay(&times, &values, regressor, Some(window))
    }
}

/// Remainder after subtracting the first `n` expansion terms.
pub fn remainder_series(
    traj: &Trajectory,
    expansion: &Expansion,
    n: usize,
) -> Result<RemainderSeries, NumericsError> {
    let rows: Vec<(f64, f64)> = traj
        .times()
        .par_iter()
        .zip(traj.states().par_iter())
        .map(|(&t, y)| {
            let r = if n == 0 {
                y.norm()
            } else {
                (y - expansion.partial_sum(t, n)?).norm()
            };
            let floor = 100.0 * (traj.rel_tol() * y.norm() + traj.abs_tol());
            Ok((r.max(CLIP), floor))
        })
        .collect::<Result<_, NumericsError>>()?;
    let (values, floors) = rows.into_iter().unzip();
    Ok(RemainderSeries {
        times: traj.times().to_vec(),
        values,
        floors,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonantFit {
    /// Coefficients of the resonant modes at the fitted order.
    pub coefficients: Vec<C64>,
    pub std_errors: Vec<f64>,
    /// `std_error / |coefficient|`.
    pub relative_uncertainty: Vec<f64>,
    /// Root-mean-square weighted residual.
    pub residual_rms: f64,
    pub samples: usize,
}

/// Least-squares constants `c` for `y(t) - Σ_{j≤k} y_j(t) ≈ Σ c_i b_i(t)` over
/// the resonant modes `b_i` of order `k`. Each time sample is weighted by
/// `1 / max_i |b_i(t)|` so that decaying modes stay comparable across the
/// window (default: last 40% of the trajectory).
pub fn fit_resonant_constants(
    traj: &Trajectory,
    expansion: &Expansion,
    k: usize,
    window: Option<(f64, f64)>,
) -> Result<ResonantFit, NumericsError> {
    if expansion.mode() != Mode::Exponential {
        return Err(NumericsError::NotExponential);
    }
    let term = expansion.term(k).ok_or(NumericsError::OrderOutOfRange {
        k,
        order: expansion.order(),
    })?;
    let modes = &term.resonant_modes;
    if modes.is_empty() {
        return Ok(ResonantFit {
            coefficients: Vec::new(),
            std_errors: Vec::new(),
            relative_uncertainty: Vec::new(),
            residual_rms: 0.0,
            samples: 0,
        });
    }
    let window = window.unwrap_or_else(|| default_window(traj.times()));
    let n = traj.states()[0].len();
    let p = modes.len();
    let mut rows: Vec<ComplexVec> = Vec::new();
    let mut rhs: Vec<C64> = Vec::new();
    let mut samples = 0;
    for (&t, y) in traj.times().iter().zip(traj.states()) {
        if t < window.0 || t > window.1 {
            continue;
        }
        let basis: Vec<ComplexVec> = modes.iter().map(|b| b.eval(t)).collect();
        let scale = basis.iter().map(|b| b.norm()).fold(0.0, f64::max);
        if !(scale > 0.0) {
            continue;
        }
        let w = C64::from(1.0 / scale);
        let r = (y - expansion.partial_sum(t, k)?) * w;
        for j in 0..n {
            rows.push(ComplexVec::from_fn(p, |i, _| basis[i][j] * w));
            rhs.push(r[j]);
        }
        samples += 1;
    }
    if samples < p.max(2) {
        return Err(NumericsError::WindowTooSmall {
            have: samples,
            need: p.max(2),
        });
    }
    let m = rows.len();
    let x = ComplexMatrix::from_fn(m, p, |r, c| rows[r][c]);
    let b = ComplexVec::from_vec(rhs);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return Err(NumericsError::IllConditioned { ratio: smin / smax });
    }
    let coeffs = svd.solve(&b, 0.0).expect("both factors computed");
    let resid = &x * &coeffs - &b;
    let dof = m.saturating_sub(p).max(1) as f64;
    let sigma2 = resid.norm_squared() / dof;
    // cov = σ² V Σ^{-2} V^H
    let v_t = svd.v_t.as_ref().unwrap();
    let std_errors: Vec<f64> = (0..p)
        .map(|i| {
            let var: f64 = (0..p)
                .map(|s| v_t[(s, i)].norm_sqr() / svd.singular_values[s].powi(2))
                .sum();
            (sigma2 * var).sqrt()
        })
        .collect();
    let coefficients: Vec<C64> = coeffs.iter().copied().collect();
    let relative_uncertainty = coefficients
        .iter()
        .zip(&std_errors)
        .map(|(c, s)| {
            if c.norm() > 0.0 {
                s / c.norm()
            } else {
                f64::INFINITY
            }
        })
        .collect();
    Ok(ResonantFit {
        coefficients,
        std_errors,
        relative_uncertainty,
        residual_rms: (resid.norm_squared() / m as f64).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{expand, MultiLinearMap, ProblemSpec};
    use crate::funclasses::ExpPolySum;
    use crate::linalg::{cvec, rmat};
    use rand::{Rng, SeedableRng};

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn geometric(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn exponential_samples() {
        let t = grid(0.0, 10.0, 50);
        let v: Vec<f64> = t.iter().map(|t| (-2.0 * t).exp()).collect();
        let f = fit_decay(&t, &v, Regressor::Time, None).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-6 && f.r_squared > 0.999999);
        assert_eq!(f.window, (6.0, 10.0));
    }

    #[test]
    fn power_samples() {
        let t = geometric(10.0, 1e4, 60);
        let v: Vec<f64> = t.iter().map(|t| t.powi(-3)).collect();
        let f = fit_decay(&t, &v, Regressor::for_mode(Mode::Power), Some((10.0, 1e4))).unwrap();
        assert!((f.exponent - 3.0).abs() < 1e-6);
    }

    #[test]
    fn logarithmic_factor_biases_down() {
        let t = geometric(1e3, 1e6, 80);
        let v: Vec<f64> = t.iter().map(|t| t.powi(-3) * t.ln().powi(2)).collect();
        let f = fit_decay(&t, &v, Regressor::LogLadder(0), Some((1e3, 1e6))).unwrap();
        assert!(f.exponent > 2.7 && f.exponent < 3.0, "{}", f.exponent);
    }

    #[test]
    fn fit_errors() {
        let t = grid(0.0, 1.0, 20);
        let mut v = vec![1.0; 20];
        v[19] = 0.0;
        assert!(matches!(
            fit_decay(&t, &v, Regressor::Time, Some((0.0, 1.0))),
            Err(NumericsError::NonPositiveSample { .. })
        ));
        assert!(matches!(
            fit_decay(&t, &[1.0; 20], Regressor::Time, Some((0.0, 0.2))),
            Err(NumericsError::WindowTooSmall { have: 4, .. })
        ));
    }

    fn resonant_expansion() -> Expansion {
        let spec = ProblemSpec::builder(rmat(&[&[2.0]]), Mode::Exponential)
            .forcing_exp(2.0, ExpPolySum::scalar(C64::from(-2.0), &[C64::from(1.0)]))
            .order(2)
            .build()
            .unwrap();
        expand(&spec).unwrap()
    }

    #[test]
    fn recovers_planted_constant() {
        let e = resonant_expansion();
        let times = grid(1.0, 8.0, 200);
        let states = times
            .iter()
            .map(|t| cvec(&[C64::from((t + 0.7) * (-2.0 * t).exp())]))
            .collect();
        let traj = Trajectory::from_samples(times, states);
        let fit = fit_resonant_constants(&traj, &e, 1, Some((1.0, 8.0))).unwrap();
        assert!((fit.coefficients[0] - C64::from(0.7)).norm() < 1e-4);
        assert!(fit.relative_uncertainty[0] < 1e-6);
    }

    #[test]
    fn noise_gives_large_uncertainty() {
        let e = resonant_expansion();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let times = grid(1.0, 8.0, 200);
        let states = times
            .iter()
            .map(|t| {
                let y = t * (-2.0 * t).exp();
                cvec(&[C64::from(
                    y + 1e-3 * rng.random_range(-1.0..1.0) * (-2.0 * t).exp(),
                )])
            })
            .collect();
        let traj = Trajectory::from_samples(times, states);
        let fit = fit_resonant_constants(&traj, &e, 1, Some((1.0, 8.0))).unwrap();
        assert!(fit.coefficients[0].norm() < 1e-3);
        assert!(fit.relative_uncertainty[0] > 0.1);
    }

    #[test]
    fn no_modes_is_a_no_op() {
        let spec = ProblemSpec::builder(rmat(&[&[1.0]]), Mode::Exponential)
            .nonlinearity(MultiLinearMap::scalar_power(2))
            .order(2)
            .build()
            .unwrap();
        let e = expand(&spec).unwrap();
        let traj = Trajectory::from_samples(vec![0.0, 1.0], vec![cvec(&[C64::from(1.0)]); 2]);
        assert!(fit_resonant_constants(&traj, &e, 1, None)
            .unwrap()
            .coefficients
            .is_empty());
    }
}
