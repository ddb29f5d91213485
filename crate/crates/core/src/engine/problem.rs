//! Problem description and validation.

use crate::funclasses::{ClassError, ExpPolySum, LogPowerSum, MultiLinearMap};
use crate::linalg::{eigenvalues, spectrum_real_parts, ComplexMatrix, ComplexVec, C64};

use super::ladder::{build_ladder, same_rate, ExponentLadder, LadderFlags};
use super::EngineError;

/// Eigenvalues of `A` must have real part above this.
pub const STABILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Terms `y_k ∈ 𝓕_E(-μ_k)`: exponential polynomials.
    Exponential,
    /// Terms in `𝓟_0(n_k, -μ_k)`: decay carried by powers of `t`.
    Power,
    /// Terms in `𝓟_{m*}(n_k, -μ_k)` with `m* ≥ 1`: decay carried by powers of
    /// the `m*`-th iterated logarithm.
    Log { m_star: i32 },
}

impl Mode {
    /// Index of the ladder variable carrying the decay; `None` in exponential mode.
    pub fn m_star(self) -> Option<i32> {
        match self {
            Mode::Exponential => None,
            Mode::Power => Some(0),
            Mode::Log { m_star } => Some(m_star),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Exponential => "exponential",
            Mode::Power => "power",
            Mode::Log { .. } => "log",
        }
    }

    fn required_flags(self) -> LadderFlags {
        match self {
            Mode::Power => LadderFlags::ADDITIVE_UNIT,
            _ => LadderFlags::ADDITIVE,
        }
    }
}

/// One expansion term or forcing term.
#[derive(Debug, Clone, PartialEq)]
pub enum TermValue {
    Exp(ExpPolySum),
    LogPower(LogPowerSum),
}

impl TermValue {
    pub fn dim(&self) -> usize {
        match self {
            TermValue::Exp(s) => s.dim(),
            TermValue::LogPower(s) => s.dim(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TermValue::Exp(s) => s.is_zero(),
            TermValue::LogPower(s) => s.is_zero(),
        }
    }

    pub fn max_coeff_norm(&self) -> f64 {
        match self {
            TermValue::Exp(s) => s.max_coeff_norm(),
            TermValue::LogPower(s) => s.max_coeff_norm(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<ComplexVec, ClassError> {
        match self {
            TermValue::Exp(s) => Ok(s.eval(t)),
            TermValue::LogPower(s) => s.eval(t),
        }
    }

    pub fn as_exp(&self) -> Option<&ExpPolySum> {
        match self {
            TermValue::Exp(s) => Some(s),
            TermValue::LogPower(_) => None,
        }
    }

    pub fn as_log_power(&self) -> Option<&LogPowerSum> {
        match self {
            TermValue::LogPower(s) => Some(s),
            TermValue::Exp(_) => None,
        }
    }
}

/// Forcing contribution `f_k` at decay rate `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingTerm {
    pub mu: f64,
    pub value: TermValue,
}

/// Overrides for the ladder. Unset fields take mode-dependent defaults: the
/// base is the forcing rates (plus `Re σ(A)` in exponential mode), the flags
/// are the ones the mode requires, and the cutoff grows until `order` values
/// are realised.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LadderConfig {
    pub base: Option<Vec<f64>>,
    pub flags: Option<LadderFlags>,
    pub cutoff: Option<f64>,
}

/// Validated problem. Construct with [`ProblemSpec::builder`].
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    a: ComplexMatrix,
    nonlinearity: Vec<MultiLinearMap>,
    forcing: Vec<ForcingTerm>,
    mode: Mode,
    order: usize,
    ladder: ExponentLadder,
    spectrum: Vec<C64>,
    depths: Vec<i32>,
    forcing_by_order: Vec<Option<TermValue>>,
}

#[derive(Debug, Clone)]
pub struct ProblemBuilder {
    a: ComplexMatrix,
    mode: Mode,
    nonlinearity: Vec<MultiLinearMap>,
    forcing: Vec<ForcingTerm>,
    ladder: LadderConfig,
    depths: Option<Vec<i32>>,
    order: usize,
}

impl ProblemBuilder {
    pub fn nonlinearity(mut self, map: MultiLinearMap) -> Self {
        self.nonlinearity.push(map);
        self
    }

    pub fn forcing(mut self, mu: f64, value: TermValue) -> Self {
        self.forcing.push(ForcingTerm { mu, value });
        self
    }

    pub fn forcing_exp(self, mu: f64, value: ExpPolySum) -> Self {
        self.forcing(mu, TermValue::Exp(value))
    }

    pub fn forcing_log_power(self, mu: f64, value: LogPowerSum) -> Self {
        self.forcing(mu, TermValue::LogPower(value))
    }

    pub fn ladder(mut self, config: LadderConfig) -> Self {
        self.ladder = config;
        self
    }

    /// Ladder depths `n_1, n_2, …`; must be nondecreasing and at least the
    /// forcing depths. Orders past the end of the list keep the last depth.
    pub fn depth_schedule(mut self, depths: Vec<i32>) -> Self {
        self.depths = Some(depths);
        self
    }

    /// Truncation order `N`.
    pub fn order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn build(self) -> Result<ProblemSpec, EngineError> {
        let n = self.a.nrows();
        if n == 0 || self.a.ncols() != n {
            return Err(EngineError::NotSquare {
                rows: self.a.nrows(),
                cols: self.a.ncols(),
            });
        }
        if let Mode::Log { m_star } = self.mode {
            if m_star < 1 {
                return Err(EngineError::WrongMode {
                    expected: "log mode with m* >= 1",
                });
            }
        }
        let spectrum = eigenvalues(&self.a);
        if let Some(&eigenvalue) = spectrum.iter().find(|z| !(z.re > STABILITY_TOL)) {
            return Err(EngineError::Unstable { eigenvalue });
        }
        for map in &self.nonlinearity {
            if map.dim() != n {
                return Err(EngineError::Nonlinearity {
                    arity: map.arity(),
                    expected: n,
                    got: map.dim(),
                });
            }
        }
        for (index, f) in self.forcing.iter().enumerate() {
            check_forcing(self.mode, n, f)
                .map_err(|reason| EngineError::Forcing { index, reason })?;
        }

        let required = self.mode.required_flags();
        let flags = self.ladder.flags.unwrap_or(required);
        if (required.additive && !flags.additive)
            || (required.unit_increment && !flags.unit_increment)
        {
            return Err(EngineError::LadderFlags {
                flags,
                mode: self.mode.name(),
            });
        }
        let spectral: Vec<f64> = match self.mode {
            Mode::Exponential => spectrum_real_parts(&self.a, 1e-12)
                .into_iter()
                .map(tidy_rate)
                .collect(),
            _ => Vec::new(),
        };
        let base = match &self.ladder.base {
            Some(base) => base.clone(),
            None => {
                let mut base: Vec<f64> = Vec::new();
                for x in self
                    .forcing
                    .iter()
                    .map(|f| f.mu)
                    .chain(spectral.iter().copied())
                {
                    if !base.iter().any(|&b| same_rate(b, x)) {
                        base.push(x);
                    }
                }
                base
            }
        };
        for &re in &spectral {
            if !generates(&base, flags, re)? {
                return Err(EngineError::SpectrumNotInBase { re });
            }
        }
        let order = self.order.max(1);
        let ladder = match self.ladder.cutoff {
            Some(cutoff) => {
                let ladder = build_ladder(&base, flags, cutoff)?;
                if ladder.len() < order {
                    return Err(EngineError::LadderOverflow {
                        needed: order,
                        realized: ladder.len(),
                        cutoff,
                    });
                }
                ladder
            }
            None => {
                let reach = self.forcing.iter().map(|f| f.mu).fold(0.0, f64::max);
                ExponentLadder::covering(&base, flags, order, reach)?
            }
        };

        let mut forcing_by_order: Vec<Option<TermValue>> = vec![None; ladder.len()];
        for (index, f) in self.forcing.iter().enumerate() {
            let k = ladder.index_of(f.mu).ok_or_else(|| EngineError::Forcing {
                index,
                reason: format!("rate {} is not a realised ladder value", f.mu),
            })?;
            let slot = &mut forcing_by_order[k];
            *slot = Some(match (slot.take(), &f.value) {
                (None, v) => v.clone(),
                (Some(TermValue::Exp(acc)), TermValue::Exp(v)) => TermValue::Exp(&acc + v),
                (Some(TermValue::LogPower(acc)), TermValue::LogPower(v)) => {
                    TermValue::LogPower(&acc + v)
                }
                _ => unreachable!("forcing kinds checked against the mode"),
            });
        }

        let depths = match self.mode.m_star() {
            None => vec![-1; ladder.len()],
            Some(m_star) => {
                let mut defaults = Vec::with_capacity(ladder.len());
                let mut running = m_star;
                for f in &forcing_by_order {
                    if let Some(TermValue::LogPower(p)) = f {
                        running = running.max(p.depth());
                    }
                    defaults.push(running);
                }
                match self.depths {
                    None => defaults,
                    Some(given) => merge_schedule(&given, &defaults, order)?,
                }
            }
        };

        Ok(ProblemSpec {
            a: self.a,
            nonlinearity: self.nonlinearity,
            forcing: self.forcing,
            mode: self.mode,
            order,
            ladder,
            spectrum,
            depths,
            forcing_by_order,
        })
    }
}

/// Eigenvalue real parts within rounding of a multiple of `1e-9` are snapped
/// to it, so ladders built from them line up with exact forcing rates.
fn tidy_rate(re: f64) -> f64 {
    let snapped = (re * 1e9).round() / 1e9;
    if (snapped - re).abs() <= 1e-12 * re.abs().max(1.0) {
        snapped
    } else {
        re
    }
}

fn generates(base: &[f64], flags: LadderFlags, x: f64) -> Result<bool, EngineError> {
    let min = base.iter().copied().fold(f64::INFINITY, f64::min);
    if x < min && !same_rate(x, min) {
        return Ok(false);
    }
    Ok(build_ladder(base, flags, x)?.contains(x))
}

fn check_forcing(mode: Mode, n: usize, f: &ForcingTerm) -> Result<(), String> {
    if !(f.mu > 0.0 && f.mu.is_finite()) {
        return Err(format!("rate {} must be positive", f.mu));
    }
    if f.value.dim() != n {
        return Err(format!(
            "dimension {} differs from system dimension {n}",
            f.value.dim()
        ));
    }
    match (mode.m_star(), &f.value) {
        (None, TermValue::Exp(s)) => {
            if !s.in_class(-f.mu) {
                return Err(format!("exponent real parts differ from -{}", f.mu));
            }
        }
        (Some(m), TermValue::LogPower(p)) => {
            if p.depth() < m {
                return Err(format!(
                    "ladder depth {} below the decay index {m}",
                    p.depth()
                ));
            }
            if !p.in_class(m, -f.mu) {
                return Err(format!(
                    "exponents outside the class with Re α_j = 0 for j < {m} and Re α_{m} = -{}",
                    f.mu
                ));
            }
        }
        (None, _) => return Err("exponential mode needs exponential-polynomial forcing".into()),
        (Some(_), _) => return Err(format!("{} mode needs log-power forcing", mode.name())),
    }
    Ok(())
}

fn merge_schedule(given: &[i32], defaults: &[i32], order: usize) -> Result<Vec<i32>, EngineError> {
    if given.len() < order {
        return Err(EngineError::DepthSchedule(format!(
            "{} depths given for order {order}",
            given.len()
        )));
    }
    if given.windows(2).any(|w| w[1] < w[0]) {
        return Err(EngineError::DepthSchedule(
            "depths must be nondecreasing".into(),
        ));
    }
    let last = *given.last().unwrap();
    let merged: Vec<i32> = (0..defaults.len())
        .map(|k| given.get(k).copied().unwrap_or(last))
        .collect();
    if let Some(k) = (0..merged.len()).find(|&k| merged[k] < defaults[k]) {
        return Err(EngineError::DepthSchedule(format!(
            "depth {} at order {} is below the required {}",
            merged[k],
            k + 1,
            defaults[k]
        )));
    }
    Ok(merged)
}

impl ProblemSpec {
    pub fn builder(a: ComplexMatrix, mode: Mode) -> ProblemBuilder {
        ProblemBuilder {
            a,
            mode,
            nonlinearity: Vec::new(),
            forcing: Vec::new(),
            ladder: LadderConfig::default(),
            depths: None,
            order: 4,
        }
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn nonlinearity(&self) -> &[MultiLinearMap] {
        &self.nonlinearity
    }

    pub fn forcing(&self) -> &[ForcingTerm] {
        &self.forcing
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn ladder(&self) -> &ExponentLadder {
        &self.ladder
    }

    pub fn spectrum(&self) -> &[C64] {
        &self.spectrum
    }

    /// Smallest real part of the spectrum of `A`.
    pub fn lambda_min(&self) -> f64 {
        self.spectrum
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min)
    }

    /// Ladder depth `n_k` used at order `k` (1-based); `-1` in exponential mode.
    pub fn depth(&self, k: usize) -> i32 {
        self.depths[k - 1]
    }

    /// Summed forcing at order `k` (1-based), if any.
    pub fn forcing_at(&self, k: usize) -> Option<&TermValue> {
        self.forcing_by_order.get(k - 1).and_then(Option::as_ref)
    }

    /// Largest arity among the supplied multilinear maps.
    pub fn max_arity(&self) -> usize {
        self.nonlinearity
            .iter()
            .map(MultiLinearMap::arity)
            .max()
            .unwrap_or(0)
    }
}
