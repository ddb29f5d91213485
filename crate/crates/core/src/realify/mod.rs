//! Real forms of conjugation-symmetric complex expansions.
//!
//! A complex sum whose term set is closed under conjugation, with conjugate
//! coefficients on conjugate exponents, is real-valued. Such sums are
//! rewritten with `cos`/`sin` factors: [`RealSPoly`] for exponential
//! polynomials with purely imaginary exponents, [`RealLogPower`] for log-power
//! sums, where `L_j^{iω} = e^{iω L_{j+1}}` turns imaginary exponents into
//! oscillations in the next ladder variable.

mod logpower;
mod spoly;

pub use logpower::{from_real_logpower, to_real_logpower, RealLogPower, RealLogTerm};
pub use spoly::{from_real_spoly, to_real_spoly, RealSPoly, SPolyTerm};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funclasses::{ClassError, ExpPolySum, LogPowerSum, MultiLinearMap};

/// Relative tolerance of the conjugation-symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Cos,
    Sin,
}

impl Phase {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Phase::Cos => x.cos(),
            Phase::Sin => x.sin(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Cos => "cos",
            Phase::Sin => "sin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RealifyError {
    #[error("map has a non-real coefficient")]
    NonRealEntry,
    #[error("sum is not closed under conjugation")]
    NotSymmetric,
    #[error("exponent has real part {re}; only purely imaginary exponents have a real S-polynomial form")]
    NonzeroRealPart { re: f64 },
    #[error("term shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Class(#[from] ClassError),
}

/// The complexification of a real multilinear map: the same coefficients,
/// read over `ℂ`. It satisfies `M(z̄_1, …, z̄_m) = conj(M(z_1, …, z_m))`.
pub fn complexify_map(map: &MultiLinearMap) -> Result<MultiLinearMap, RealifyError> {
    if map.is_real() {
        Ok(map.clone())
    } else {
        Err(RealifyError::NonRealEntry)
    }
}

/// Sums that can be checked for conjugation symmetry.
pub trait ConjugationSymmetric {
    /// Conjugate exponents carry conjugate coefficients, to relative
    /// tolerance [`SYMMETRY_TOL`].
    fn is_conjugation_symmetric(&self) -> bool;
}

impl ConjugationSymmetric for ExpPolySum {
    fn is_conjugation_symmetric(&self) -> bool {
        self.approx_eq(&self.conj(), SYMMETRY_TOL)
    }
}

impl ConjugationSymmetric for LogPowerSum {
    fn is_conjugation_symmetric(&self) -> bool {
        self.approx_eq(&self.conj(), SYMMETRY_TOL)
    }
}

pub fn check_conjugation_symmetry<S: ConjugationSymmetric>(p: &S) -> bool {
    p.is_conjugation_symmetric()
}
