//! Numerical checks: ODE integration, smallness certificates, decay fits,
//! quadrature of the variation-of-constants integral, and fitting of resonant
//! free constants.

mod certificate;
mod fit;
mod integrate;
mod quadrature;

pub use certificate::{
    estimate_c0, matrix_exp_norm, sample_c_star, smallness_certificate, SmallnessCertificate,
    DEFAULT_DIRECTIONS,
};
pub use fit::{
    fit_decay, fit_resonant_constants, remainder_series, DecayFit, Regressor, RemainderSeries,
    ResonantFit, MIN_FIT_SAMPLES,
};
pub use integrate::{dopri5, integrate, integrate_with, IntegratorOptions, StepStats, Trajectory};
pub use quadrature::{adaptive_gk15, verify_lemma_newplem, KernelQuadrature, LemmaCheck};

use thiserror::Error;

use crate::engine::EngineError;
use crate::funclasses::ClassError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("tolerances must lie in (0, 1e-2], got rel {rel}, abs {abs}")]
    Tolerance { rel: f64, abs: f64 },
    #[error("time span [{t0}, {t1}] is empty or not finite")]
    Span { t0: f64, t1: f64 },
    #[error("state has dimension {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("step size underflow at t = {t} (h = {h}); the solution may blow up")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step limit reached at t = {t}")]
    TooManySteps { t: f64 },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("sample at t = {t} is not positive ({value})")]
    NonPositiveSample { t: f64, value: f64 },
    #[error("fit window holds {have} usable samples, at least {need} are needed")]
    WindowTooSmall { have: usize, need: usize },
    #[error("design matrix is ill-conditioned (singular value ratio {ratio:e})")]
    IllConditioned { ratio: f64 },
    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("operation needs an exponential-mode expansion")]
    NotExponential,
    #[error("order {k} outside 1..={order}")]
    OrderOutOfRange { k: usize, order: usize },
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}
