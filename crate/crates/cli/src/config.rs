//! TOML run configuration.
//!
//! Complex numbers are written as `[re, im]` or as plain reals; sparse tensors
//! as entry lists. Unknown keys are rejected.

use std::path::Path;

use asymptotics_core::engine::LadderConfig;
use asymptotics_core::funclasses::MapEntry;
use asymptotics_core::linalg::{ComplexMatrix, ComplexVec, C64};
use asymptotics_core::realify::{
    from_real_logpower, from_real_spoly, RealLogPower, RealLogTerm, RealSPoly, SPolyTerm,
};
use asymptotics_core::{
    EngineError, ExpPolySum, ExpPolyTerm, ExponentVector, LogPowerSum, LogPowerTerm, Mode,
    MultiLinearMap, Phase, ProblemSpec, TermValue,
};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn value(self) -> C64 {
        match self {
            Scalar::Real(x) => C64::new(x, 0.0),
            Scalar::Complex([re, im]) => C64::new(re, im),
        }
    }
}

fn vector(v: &[Scalar]) -> ComplexVec {
    ComplexVec::from_iterator(v.len(), v.iter().map(|s| s.value()))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub expansion: ExpansionConfig,
    pub verification: Option<VerificationConfig>,
    #[serde(default)]
    pub realify: RealifyConfig,
    pub certificate: Option<CertificateConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Exponential,
    Power,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub mode: ModeName,
    /// Decay index for log mode.
    pub m_star: Option<i32>,
    /// Rows of `A`.
    pub a: Vec<Vec<Scalar>>,
    #[serde(default)]
    pub nonlinearity: Vec<MapConfig>,
    #[serde(default)]
    pub forcing: Vec<ForcingConfig>,
    pub depth_schedule: Option<Vec<i32>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub arity: usize,
    pub entries: Vec<EntryConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryConfig {
    pub output: usize,
    pub inputs: Vec<usize>,
    pub value: Scalar,
}

/// One forcing record at decay rate `mu`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingConfig {
    /// `Σ p_ν(t) e^{νt}`.
    ExpPoly {
        mu: f64,
        terms: Vec<ExpPolyTermConfig>,
    },
    /// `Σ z^α ξ` over the ladder `(e^t, t, ln t, …)` of depth `depth`.
    LogPower {
        mu: f64,
        depth: i32,
        terms: Vec<LogPowerTermConfig>,
    },
    /// `e^{-μt} Σ t^m σ(ωt) Z`.
    RealSpoly {
        mu: f64,
        terms: Vec<RealSpolyTermConfig>,
    },
    /// `Σ z^α Π σ_j(ω_j z_j) ξ` with real exponents.
    RealLogPower {
        mu: f64,
        depth: i32,
        terms: Vec<RealLogTermConfig>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpPolyTermConfig {
    pub exponent: Scalar,
    /// `coefficients[m]` multiplies `t^m`.
    pub coefficients: Vec<Vec<Scalar>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogPowerTermConfig {
    /// `α_{-1}, α_0, …, α_k`.
    pub exponent: Vec<Scalar>,
    pub coefficient: Vec<Scalar>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealSpolyTermConfig {
    #[serde(default)]
    pub power: usize,
    #[serde(default)]
    pub frequency: f64,
    #[serde(default = "cos")]
    pub phase: Phase,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealLogTermConfig {
    pub exponent: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub phases: Vec<Phase>,
    pub vector: Vec<f64>,
}

fn cos() -> Phase {
    Phase::Cos
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    #[default]
    ZeroFreeConstants,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionConfig {
    #[serde(default = "default_order")]
    pub order: usize,
    pub ladder_base: Option<Vec<f64>>,
    pub ladder_cutoff: Option<f64>,
    #[serde(default)]
    pub resonance_policy: PolicyName,
}

fn default_order() -> usize {
    4
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            order: default_order(),
            ladder_base: None,
            ladder_cutoff: None,
            resonance_policy: PolicyName::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationConfig {
    pub y0: Vec<Scalar>,
    pub t_span: [f64; 2],
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    /// Remainder fit window; default is the last 40% of `t_span`.
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Fit the free constants of resonant orders before measuring remainders.
    #[serde(default)]
    pub fit_resonant: bool,
    pub resonant_window: Option<[f64; 2]>,
}

fn default_rel_tol() -> f64 {
    1e-10
}

fn default_abs_tol() -> f64 {
    1e-14
}

fn default_margin() -> f64 {
    0.1
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealifyConfig {
    /// Times at which complex and real forms are compared.
    pub samples: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    pub r_star: f64,
    #[serde(default = "default_directions")]
    pub directions: usize,
}

fn default_directions() -> usize {
    asymptotics_core::numerics::DEFAULT_DIRECTIONS
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Txt,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
    #[serde(default)]
    pub format: Format,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        match (self.problem.mode, self.problem.m_star) {
            (ModeName::Exponential, None) => Ok(Mode::Exponential),
            (ModeName::Power, None | Some(0)) => Ok(Mode::Power),
            (ModeName::Log, Some(m_star)) if m_star >= 1 => Ok(Mode::Log { m_star }),
            (ModeName::Log, _) => Err(invalid("problem.m_star", "log mode needs m_star >= 1")),
            (_, Some(_)) => Err(invalid("problem.m_star", "only log mode takes m_star")),
        }
    }

    pub fn matrix(&self) -> Result<ComplexMatrix, CliError> {
        let rows = &self.problem.a;
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(invalid("problem.a", "matrix must be square and nonempty"));
        }
        Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j].value()))
    }

    /// Validated problem; validation failures name the offending config path.
    pub fn problem_spec(&self) -> Result<ProblemSpec, CliError> {
        let mode = self.mode()?;
        let a = self.matrix()?;
        let n = a.nrows();
        let mut builder = ProblemSpec::builder(a, mode).order(self.expansion.order);
        for (i, map) in self.problem.nonlinearity.iter().enumerate() {
            let entries = map
                .entries
                .iter()
                .map(|e| MapEntry {
                    output: e.output,
                    inputs: e.inputs.clone(),
                    value: e.value.value(),
                })
                .collect();
            let built = MultiLinearMap::new(map.arity, n, entries)
                .map_err(|e| invalid(&format!("problem.nonlinearity[{i}]"), &e.to_string()))?;
            builder = builder.nonlinearity(built);
        }
        for (i, f) in self.problem.forcing.iter().enumerate() {
            let path = format!("problem.forcing[{i}]");
            let (mu, value) = forcing_value(f).map_err(|e| invalid(&path, &e))?;
            builder = builder.forcing(mu, value);
        }
        if let Some(depths) = &self.problem.depth_schedule {
            builder = builder.depth_schedule(depths.clone());
        }
        builder = builder.ladder(LadderConfig {
            base: self.expansion.ladder_base.clone(),
            flags: None,
            cutoff: self.expansion.ladder_cutoff,
        });
        builder.build().map_err(engine_diagnostic)
    }

    pub fn y0(&self) -> Result<ComplexVec, CliError> {
        let v = self
            .verification
            .as_ref()
            .ok_or_else(|| invalid("verification", "section is required"))?;
        Ok(vector(&v.y0))
    }
}

fn invalid(path: &str, message: &str) -> CliError {
    CliError::Validation(format!("{path}: {message}"))
}

fn engine_diagnostic(e: EngineError) -> CliError {
    let path = match &e {
        EngineError::Forcing { index, .. } => format!("problem.forcing[{index}]"),
        EngineError::SpectrumNotInBase { .. } => {
            return invalid(
                "expansion.ladder_base",
                &format!("{e}; in exponential mode the ladder must contain every Re σ(A)"),
            )
        }
        EngineError::NotSquare { .. } | EngineError::Unstable { .. } => "problem.a".into(),
        EngineError::Nonlinearity { .. } => "problem.nonlinearity".into(),
        EngineError::DepthSchedule(_) => "problem.depth_schedule".into(),
        EngineError::LadderOverflow { .. } | EngineError::InvalidCutoff { .. } => {
            "expansion.ladder_cutoff".into()
        }
        EngineError::EmptyBase | EngineError::NonPositiveBase(_) => "expansion.ladder_base".into(),
        _ => "problem".into(),
    };
    invalid(&path, &e.to_string())
}

fn forcing_value(f: &ForcingConfig) -> Result<(f64, TermValue), String> {
    Ok(match f {
        ForcingConfig::ExpPoly { mu, terms } => {
            let dim = terms
                .first()
                .and_then(|t| t.coefficients.first())
                .map_or(0, Vec::len);
            let raw = terms.iter().map(|t| {
                ExpPolyTerm::new(
                    t.exponent.value(),
                    t.coefficients.iter().map(|c| vector(c)).collect(),
                )
            });
            if terms
                .iter()
                .flat_map(|t| &t.coefficients)
                .any(|c| c.len() != dim)
            {
                return Err("coefficient vectors differ in length".into());
            }
            (*mu, TermValue::Exp(ExpPolySum::canonicalize(dim, raw)))
        }
        ForcingConfig::LogPower { mu, depth, terms } => {
            let dim = terms.first().map_or(0, |t| t.coefficient.len());
            let raw = terms.iter().map(|t| {
                LogPowerTerm::new(
                    ExponentVector::new(t.exponent.iter().map(|s| s.value()).collect()),
                    vector(&t.coefficient),
                )
            });
            let sum = LogPowerSum::canonicalize(dim, *depth, raw).map_err(|e| e.to_string())?;
            (*mu, TermValue::LogPower(sum))
        }
        ForcingConfig::RealSpoly { mu, terms } => {
            let dim = terms.first().map_or(0, |t| t.vector.len());
            let real = RealSPoly::canonicalize(
                dim,
                terms.iter().map(|t| SPolyTerm {
                    power: t.power,
                    frequency: t.frequency,
                    phase: t.phase,
                    vector: t.vector.clone().into(),
                }),
            )
            .map_err(|e| e.to_string())?;
            (
                *mu,
                TermValue::Exp(from_real_spoly(&real).shift(C64::new(-mu, 0.0))),
            )
        }
        ForcingConfig::RealLogPower { mu, depth, terms } => {
            let dim = terms.first().map_or(0, |t| t.vector.len());
            let real = RealLogPower::canonicalize(
                dim,
                *depth,
                terms.iter().map(|t| RealLogTerm {
                    exponent: t.exponent.clone(),
                    frequencies: t.frequencies.clone(),
                    phases: t.phases.clone(),
                    coeff: t.vector.clone().into(),
                }),
            )
            .map_err(|e| e.to_string())?;
            let complex = from_real_logpower(&real).map_err(|e| e.to_string())?;
            (*mu, TermValue::LogPower(complex))
        }
    })
}
