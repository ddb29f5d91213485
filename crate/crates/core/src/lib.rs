//! Asymptotic expansions for dissipative systems `y' = -Ay + G(y) + f(t)`.
//!
//! The crate is organised in four layers:
//!
//! - [`funclasses`]: the two symbolic function algebras (exponential-polynomial
//!   sums and power sums over the iterated-logarithm ladder) and the linear
//!   operators acting on them.
//! - [`engine`]: exponent ladders and the recursive construction of expansion
//!   terms in exponential, power, and iterated-logarithmic modes.
//! - [`realify`]: conjugation-symmetric forms and conversion to real
//!   sin/cos representations.
//! - [`numerics`]: ODE integration, remainder decay fits, quadrature checks and
//!   smallness certificates.

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod funclasses;
pub mod linalg;
pub mod numerics;
pub mod realify;
pub mod serial;

mod key;

pub use engine::{
    build_ladder, expand, symbolic_defect, EngineError, Expansion, ExpansionTerm, ExponentLadder,
    ForcingTerm, LadderConfig, LadderFlags, Mode, ProblemSpec, TermValue,
};
pub use funclasses::{
    ladder_eval, ExpPolySum, ExpPolyTerm, ExponentVector, LadderPoint, LogPowerSum, LogPowerTerm,
    MultiLinearMap,
};
pub use linalg::{ComplexMatrix, ComplexVec, C64};
pub use numerics::{DecayFit, Regressor, SmallnessCertificate, Trajectory};
pub use realify::{Phase, RealLogPower, RealSPoly};
