use crate::linalg::{ComplexVec, C64, ONE};

use super::ClassError;

/// One sparse entry: output component `output` receives
/// `value · Π_ℓ x_ℓ[inputs[ℓ]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapEntry {
    pub output: usize,
    pub inputs: Vec<usize>,
    pub value: C64,
}

/// Sparse `m`-linear map `(ℂⁿ)^m → ℂⁿ`.
///
/// The homogeneous polynomial it induces is `G_m(x) = 𝒢_m(x, …, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiLinearMap {
    arity: usize,
    dim: usize,
    entries: Vec<MapEntry>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error("arity must be at least 2, got {0}")]
    Arity(usize),
    #[error("entry {entry}: expected {arity} input indices, got {got}")]
    InputCount {
        entry: usize,
        arity: usize,
        got: usize,
    },
    #[error("entry {entry}: index {index} out of range for dimension {dim}")]
    Index {
        entry: usize,
        index: usize,
        dim: usize,
    },
    #[error("entry {entry}: value is not finite")]
    NonFinite { entry: usize },
}

impl MultiLinearMap {
    pub fn new(arity: usize, dim: usize, entries: Vec<MapEntry>) -> Result<Self, MapError> {
        if arity < 2 {
            return Err(MapError::Arity(arity));
        }
        for (k, e) in entries.iter().enumerate() {
            if e.inputs.len() != arity {
                return Err(MapError::InputCount {
                    entry: k,
                    arity,
                    got: e.inputs.len(),
                });
            }
            if let Some(&index) = std::iter::once(&e.output)
                .chain(&e.inputs)
                .find(|&&i| i >= dim)
            {
                return Err(MapError::Index {
                    entry: k,
                    index,
                    dim,
                });
            }
            if !(e.value.re.is_finite() && e.value.im.is_finite()) {
                return Err(MapError::NonFinite { entry: k });
            }
        }
        Ok(MultiLinearMap {
            arity,
            dim,
            entries,
        })
    }

    /// The scalar map `(x_1, …, x_m) ↦ x_1⋯x_m`, so that `G(y) = y^m`.
    pub fn scalar_power(arity: usize) -> Self {
        Self::new(
            arity,
            1,
            vec![MapEntry {
                output: 0,
                inputs: vec![0; arity],
                value: ONE,
            }],
        )
        .expect("valid scalar power map")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[MapEntry] {
        &self.entries
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|e| e.value.im == 0.0)
    }

    pub(crate) fn check_args(
        &self,
        dims: impl ExactSizeIterator<Item = usize>,
    ) -> Result<(), ClassError> {
        if dims.len() != self.arity {
            return Err(ClassError::ArityMismatch {
                expected: self.arity,
                got: dims.len(),
            });
        }
        for d in dims {
            if d != self.dim {
                return Err(ClassError::DimensionMismatch {
                    expected: self.dim,
                    got: d,
                });
            }
        }
        Ok(())
    }

    pub fn apply(&self, args: &[&ComplexVec]) -> Result<ComplexVec, ClassError> {
        self.check_args(args.iter().map(|a| a.len()))?;
        let mut out = ComplexVec::zeros(self.dim);
        for e in &self.entries {
            let prod = e
                .inputs
                .iter()
                .zip(args)
                .fold(e.value, |acc, (&i, x)| acc * x[i]);
            out[e.output] += prod;
        }
        Ok(out)
    }

    /// `G_m(x) = 𝒢_m(x, …, x)`.
    pub fn apply_diagonal(&self, x: &ComplexVec) -> ComplexVec {
        let args = vec![x; self.arity];
        self.apply(&args).expect("diagonal arguments match arity")
    }

    /// Crude upper bound `Σ |value|` on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.entries.iter().map(|e| e.value.norm()).sum()
    }
}
