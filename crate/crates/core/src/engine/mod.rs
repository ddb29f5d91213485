//! Recursive construction of asymptotic expansions for `y' = -Ay + G(y) + f(t)`.
//!
//! A [`ProblemSpec`] fixes the linear part, the multilinear pieces of `G`,
//! the forcing terms keyed by their decay rates, and the expansion mode. The
//! expansion is built order by order over the realised [`ExponentLadder`].

mod expand;
mod ladder;
mod problem;

pub use expand::{
    expand, expand_exponential, expand_log, expand_power, symbolic_defect, Expansion, ExpansionTerm,
};
pub use ladder::{build_ladder, ExponentLadder, LadderFlags, LADDER_TOL};
pub use problem::{ForcingTerm, LadderConfig, Mode, ProblemBuilder, ProblemSpec, TermValue};

pub use crate::funclasses::MultiLinearMap;

use thiserror::Error;

use crate::funclasses::ClassError;
use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("ladder base is empty")]
    EmptyBase,
    #[error("ladder base element {0} is not a positive finite number")]
    NonPositiveBase(f64),
    #[error("ladder cutoff {cutoff} is below the smallest base element {min}")]
    InvalidCutoff { cutoff: f64, min: f64 },
    #[error("{mu} is not a realised ladder value")]
    NotInLadder { mu: f64 },
    #[error("ladder has {realized} values up to cutoff {cutoff}, {needed} are needed")]
    LadderOverflow {
        needed: usize,
        realized: usize,
        cutoff: f64,
    },
    #[error("ladder flags {flags:?} do not meet the {mode} mode requirement")]
    LadderFlags {
        flags: LadderFlags,
        mode: &'static str,
    },
    #[error("matrix must be square with positive size, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("eigenvalue {eigenvalue} of A has real part <= 1e-10")]
    Unstable { eigenvalue: C64 },
    #[error("real part {re} of an eigenvalue of A is not generated by the ladder base")]
    SpectrumNotInBase { re: f64 },
    #[error("forcing term {index}: {reason}")]
    Forcing { index: usize, reason: String },
    #[error("nonlinearity of arity {arity} has dimension {got}, expected {expected}")]
    Nonlinearity {
        arity: usize,
        expected: usize,
        got: usize,
    },
    #[error("depth schedule: {0}")]
    DepthSchedule(String),
    #[error("order {k} has several predecessors at distance one")]
    AmbiguousShift { k: usize },
    #[error("term of order {k} (rate {mu}) left its declared class")]
    ClassViolation { k: usize, mu: f64 },
    #[error("order {k} outside 1..={order}")]
    OrderOutOfRange { k: usize, order: usize },
    #[error("order {k} has {modes} resonant modes, {given} constants given")]
    FreeConstants {
        k: usize,
        modes: usize,
        given: usize,
    },
    #[error("replacement for order {k} differs in kind or dimension")]
    TermShape { k: usize },
    #[error("operation needs {expected} mode")]
    WrongMode { expected: &'static str },
    #[error(transparent)]
    Class(#[from] ClassError),
}
