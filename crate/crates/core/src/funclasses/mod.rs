//! Symbolic function classes.
//!
//! Two algebras are represented canonically:
//!
//! - [`ExpPolySum`]: finite sums `Σ_ν p_ν(t) e^{νt}` with vector-valued
//!   polynomial coefficients.
//! - [`LogPowerSum`]: finite sums `Σ_α z^α ξ_α` of complex power monomials in
//!   the ladder variables `z = (e^t, t, ln t, ln ln t, …)`.
//!
//! Both types are kept canonical by construction: equal exponents merged,
//! negligible coefficients trimmed, empty terms dropped.

mod exppoly;
mod ladder;
mod logpower;
mod multilinear;
mod resolvent;

pub use exppoly::{ExpPolySum, ExpPolyTerm};
pub use ladder::{iterated_exp_zero, ladder_eval, LadderPoint};
pub use logpower::{ExponentVector, LogPowerSum, LogPowerTerm};
pub use multilinear::{MapEntry, MultiLinearMap};
pub use resolvent::{resolvent_solve_exp, ResolventSolution, ResonancePolicy};

use thiserror::Error;

/// Coefficients below this fraction of the largest contributing coefficient
/// are dropped during canonicalisation.
pub const TRIM_REL: f64 = 1e-13;

/// Tolerance for real-part class membership tests.
pub const CLASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassError {
    #[error("arity mismatch: map takes {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("depth mismatch: expected {expected}, got {got}")]
    DepthMismatch { expected: i32, got: i32 },
    #[error("cannot embed depth {from} into smaller depth {to}")]
    EmbedDepth { from: i32, to: i32 },
    #[error("ladder of depth {depth} needs t > {bound}, got t = {t}")]
    Domain { depth: i32, t: f64, bound: f64 },
    #[error("operator index {index} outside [-1, {depth}]")]
    IndexOutOfRange { index: i32, depth: i32 },
    #[error("the R operator needs depth >= 0")]
    DepthTooSmall,
    #[error("resolvent needs purely imaginary e^t exponents, found real part {re}")]
    NonImaginaryShift { re: f64 },
    #[error("A + ({shift})I is numerically singular")]
    SingularShift { shift: C64 },
    #[error(
        "resonant system for exponent {exponent} stays inconsistent up to degree bump {max_bump}"
    )]
    ResonanceUnresolved { exponent: C64, max_bump: usize },
}

use crate::linalg::C64;
