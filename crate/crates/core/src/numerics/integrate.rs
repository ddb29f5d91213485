//! Dormand–Prince 5(4) with PI step control and cubic Hermite dense output.

use crate::engine::{ProblemSpec, TermValue};
use crate::funclasses::iterated_exp_zero;
use crate::linalg::{ComplexVec, C64};

use super::NumericsError;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Largest step; defaults to the span length.
    pub max_step: Option<f64>,
}

impl IntegratorOptions {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        IntegratorOptions {
            rel_tol,
            abs_tol,
            max_steps: 5_000_000,
            max_step: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Accepted steps of an integration, with slopes for Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<ComplexVec>,
    slopes: Option<Vec<ComplexVec>>,
    stats: StepStats,
    rel_tol: f64,
    abs_tol: f64,
}

impl Trajectory {
    /// Trajectory from given samples; interpolation is linear.
    pub fn from_samples(times: Vec<f64>, states: Vec<ComplexVec>) -> Self {
        assert_eq!(times.len(), states.len());
        assert!(
            times.windows(2).all(|w| w[0] < w[1]),
            "time grid must increase"
        );
        Trajectory {
            times,
            states,
            slopes: None,
            stats: StepStats::default(),
            rel_tol: 0.0,
            abs_tol: 0.0,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[ComplexVec] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// State at `t` by cubic Hermite interpolation between accepted steps.
    pub fn sample(&self, t: f64) -> Option<ComplexVec> {
        if self.times.is_empty() || t < self.t_start() || t > self.t_end() {
            return None;
        }
        let i = self
            .times
            .partition_point(|&s| s <= t)
            .clamp(1, self.times.len() - 1);
        if self.times.len() == 1 {
            return Some(self.states[0].clone());
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (y0, y1) = (&self.states[i - 1], &self.states[i]);
        Some(match &self.slopes {
            Some(slopes) => {
                let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
                let h10 = s * (1.0 - s) * (1.0 - s);
                let h01 = s * s * (3.0 - 2.0 * s);
                let h11 = s * s * (s - 1.0);
                y0 * C64::from(h00)
                    + &slopes[i - 1] * C64::from(h10 * h)
                    + y1 * C64::from(h01)
                    + &slopes[i] * C64::from(h11 * h)
            }
            None => y0 * C64::from(1.0 - s) + y1 * C64::from(s),
        })
    }

    /// States on `grid`; points outside the integrated span give `None`.
    pub fn resample(&self, grid: &[f64]) -> Vec<Option<ComplexVec>> {
        grid.iter().map(|&t| self.sample(t)).collect()
    }

    /// CSV with header `t,re_y1,im_y1,…` and an optional extra column.
    pub fn write_csv<W: std::io::Write>(
        &self,
        out: W,
        extra: Option<(&str, &[f64])>,
    ) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.states.first().map_or(0, |s| s.len());
        let mut header = vec!["t".to_string()];
        for i in 1..=n {
            header.push(format!("re_y{i}"));
            header.push(format!("im_y{i}"));
        }
        if let Some((name, _)) = extra {
            header.push(name.to_string());
        }
        w.write_record(&header)?;
        for (idx, (t, y)) in self.times.iter().zip(&self.states).enumerate() {
            let mut row = vec![format!("{t:.16e}")];
            for z in y.iter() {
                row.push(format!("{:.16e}", z.re));
                row.push(format!("{:.16e}", z.im));
            }
            if let Some((_, values)) = extra {
                row.push(format!("{:.16e}", values[idx]));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Real trajectory produced by [`dopri5`]: times, states and slopes.
pub type RawSteps = (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>, StepStats);

fn error_norm(err: &[f64], y: &[f64], y_new: &[f64], opts: &IntegratorOptions) -> f64 {
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(y_new))
        .map(|(e, (a, b))| {
            let sc = opts.abs_tol + opts.rel_tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / err.len().max(1) as f64).sqrt()
}

/// Integrate the real system `y' = rhs(t, y)` over `[t0, t1]`.
pub fn dopri5(
    mut rhs: impl FnMut(f64, &[f64], &mut [f64]),
    t0: f64,
    t1: f64,
    y0: &[f64],
    opts: &IntegratorOptions,
) -> Result<RawSteps, NumericsError> {
    if !(opts.rel_tol > 0.0 && opts.rel_tol <= 1e-2 && opts.abs_tol > 0.0 && opts.abs_tol <= 1e-2) {
        return Err(NumericsError::Tolerance {
            rel: opts.rel_tol,
            abs: opts.abs_tol,
        });
    }
    if !(t1 > t0 && t0.is_finite() && t1.is_finite()) {
        return Err(NumericsError::Span { t0, t1 });
    }
    let dim = y0.len();
    let max_step = opts.max_step.unwrap_or(t1 - t0);
    let mut stats = StepStats::default();
    let mut k = vec![vec![0.0; dim]; 7];
    let mut y = y0.to_vec();
    let mut t = t0;
    rhs(t, &y, &mut k[0]);
    stats.evaluations += 1;

    let mut times = vec![t];
    let mut states = vec![y.clone()];
    let mut slopes = vec![k[0].clone()];

    let mut h = initial_step(&mut rhs, t, &y, &k[0], opts, &mut stats).min(max_step);
    let mut fac_old = 1e-4_f64;
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    const BETA: f64 = 0.04;
    const EXPO: f64 = 0.2 - 0.75 * BETA;
    const SAFETY: f64 = 0.9;

    while t < t1 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(NumericsError::TooManySteps { t });
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(NumericsError::StepUnderflow { t, h });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..dim {
                stage[i] = y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            rhs(t + C[s] * h, &stage, &mut k[s]);
        }
        stats.evaluations += 6;
        // Stage 7 is evaluated at the fifth-order solution.
        y_new.copy_from_slice(&stage);
        for i in 0..dim {
            err[i] = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
        }
        let e = error_norm(&err, &y, &y_new, opts);
        if !e.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            stats.rejected += 1;
            h *= 0.2;
            continue;
        }
        let fac11 = e.powf(EXPO);
        if e <= 1.0 {
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(0.1, 5.0);
            fac_old = e.max(1e-4);
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            stats.accepted += 1;
            times.push(t);
            states.push(y.clone());
            slopes.push(k[0].clone());
            h = (h / fac).min(max_step);
        } else {
            stats.rejected += 1;
            h /= (fac11 / SAFETY).min(5.0);
        }
    }
    Ok((times, states, slopes, stats))
}

fn initial_step(
    rhs: &mut impl FnMut(f64, &[f64], &mut [f64]),
    t: f64,
    y: &[f64],
    f0: &[f64],
    opts: &IntegratorOptions,
    stats: &mut StepStats,
) -> f64 {
    let sc: Vec<f64> = y
        .iter()
        .map(|v| opts.abs_tol + opts.rel_tol * v.abs())
        .collect();
    let rms = |v: &[f64]| {
        (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len().max(1) as f64)
            .sqrt()
    };
    let (d0, d1) = (rms(y), rms(f0));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    rhs(t + h0, &y1, &mut f1);
    stats.evaluations += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Forcing `f(t)` summed over all records of the problem.
pub(crate) fn forcing_at(spec: &ProblemSpec, t: f64) -> Result<ComplexVec, NumericsError> {
    let mut f = ComplexVec::zeros(spec.dim());
    for term in spec.forcing() {
        f += term.value.eval(t)?;
    }
    Ok(f)
}

/// Smallest time at which every forcing record can be evaluated.
pub(crate) fn forcing_domain_start(spec: &ProblemSpec) -> f64 {
    spec.forcing()
        .iter()
        .map(|f| match &f.value {
            TermValue::Exp(_) => f64::NEG_INFINITY,
            TermValue::LogPower(p) => iterated_exp_zero(p.depth() + 1),
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Integrate `y' = -Ay + G(y) + f(t)` from `y(t_span.0) = y0`. Complex states
/// are integrated as `2n` real components.
pub fn integrate(
    spec: &ProblemSpec,
    y0: &ComplexVec,
    t_span: (f64, f64),
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trajectory, NumericsError> {
    integrate_with(spec, y0, t_span, &IntegratorOptions::new(rel_tol, abs_tol))
}

pub fn integrate_with(
    spec: &ProblemSpec,
    y0: &ComplexVec,
    t_span: (f64, f64),
    opts: &IntegratorOptions,
) -> Result<Trajectory, NumericsError> {
    let n = spec.dim();
    if y0.len() != n {
        return Err(NumericsError::Dimension {
            expected: n,
            got: y0.len(),
        });
    }
    let start = forcing_domain_start(spec);
    if !(t_span.0 > start) {
        forcing_at(spec, t_span.0)?;
    }
    let a = spec.a().clone();
    let maps = spec.nonlinearity();
    let mut domain_error = None;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let z = ComplexVec::from_fn(n, |i, _| C64::new(y[i], y[n + i]));
        let mut v = -(&a * &z);
        for map in maps {
            v += map.apply_diagonal(&z);
        }
        match forcing_at(spec, t) {
            Ok(f) => v += f,
            Err(e) => {
                domain_error.get_or_insert(e);
            }
        }
        for i in 0..n {
            dy[i] = v[i].re;
            dy[n + i] = v[i].im;
        }
    };
    let real0: Vec<f64> = y0
        .iter()
        .map(|z| z.re)
        .chain(y0.iter().map(|z| z.im))
        .collect();
    let result = dopri5(rhs, t_span.0, t_span.1, &real0, opts);
    if let Some(e) = domain_error {
        return Err(e);
    }
    let (times, states, slopes, stats) = result?;
    let to_complex = |v: Vec<f64>| ComplexVec::from_fn(n, |i, _| C64::new(v[i], v[n + i]));
    Ok(Trajectory {
        times,
        states: states.into_iter().map(to_complex).collect(),
        slopes: Some(slopes.into_iter().map(to_complex).collect()),
        stats,
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
    })
}
