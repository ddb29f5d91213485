//! Order-by-order construction of the expansion terms.

use rayon::prelude::*;

use crate::funclasses::{resolvent_solve_exp, ExpPolySum, LogPowerSum, ResonancePolicy};
use crate::linalg::{ComplexVec, C64};

use super::ladder::{same_rate, ExponentLadder};
use super::problem::{Mode, ProblemSpec, TermValue};
use super::EngineError;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerm {
    pub mu: f64,
    pub value: TermValue,
    /// Homogeneous solutions `b(t)` that may be added to this term with a free
    /// constant (exponential mode, resonant orders only).
    pub resonant_modes: Vec<ExpPolySum>,
    /// Ladder depth of the term; `-1` in exponential mode.
    pub depth: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    mode: Mode,
    ladder: ExponentLadder,
    terms: Vec<ExpansionTerm>,
    notes: Vec<String>,
}

/// Build the expansion of `spec` up to its truncation order.
pub fn expand(spec: &ProblemSpec) -> Result<Expansion, EngineError> {
    let mut expansion = Expansion::empty(spec);
    expansion.extend_to(spec, spec.order())?;
    Ok(expansion)
}

/// Exponential-mode expansion: `y_k' + A y_k = J_k + f_k`.
pub fn expand_exponential(spec: &ProblemSpec) -> Result<Expansion, EngineError> {
    require(spec, Mode::Exponential, "exponential")?;
    expand(spec)
}

/// Power-mode expansion: `q_k = 𝒵_A(J_k + p_k - χ_k)`.
pub fn expand_power(spec: &ProblemSpec) -> Result<Expansion, EngineError> {
    require(spec, Mode::Power, "power")?;
    expand(spec)
}

/// Log-mode expansion: `q_k = 𝒵_A(J_k + p_k)`.
pub fn expand_log(spec: &ProblemSpec) -> Result<Expansion, EngineError> {
    if !matches!(spec.mode(), Mode::Log { .. }) {
        return Err(EngineError::WrongMode { expected: "log" });
    }
    expand(spec)
}

fn require(spec: &ProblemSpec, mode: Mode, name: &'static str) -> Result<(), EngineError> {
    if spec.mode() == mode {
        Ok(())
    } else {
        Err(EngineError::WrongMode { expected: name })
    }
}

/// Residual of the defining equation at order `k`: `y_k' + A y_k - J_k - f_k`
/// in exponential mode, `(A + 𝓜_{-1}) q_k - (J_k + p_k - χ_k)` otherwise. It is
/// zero up to rounding for every constructed term.
pub fn symbolic_defect(
    spec: &ProblemSpec,
    expansion: &Expansion,
    k: usize,
) -> Result<TermValue, EngineError> {
    let term = expansion.term(k).ok_or(EngineError::OrderOutOfRange {
        k,
        order: expansion.order(),
    })?;
    let rhs = expansion.rhs(spec, k)?;
    Ok(match (&term.value, &rhs) {
        (TermValue::Exp(y), TermValue::Exp(r)) => {
            TermValue::Exp(&(&y.derivative() + &y.mat_mul(spec.a())) - r)
        }
        (TermValue::LogPower(q), TermValue::LogPower(r)) => {
            TermValue::LogPower(&q.apply_shifted(spec.a()) - r)
        }
        _ => unreachable!("term kind follows the mode"),
    })
}

impl Expansion {
    fn empty(spec: &ProblemSpec) -> Self {
        Expansion {
            mode: spec.mode(),
            ladder: spec.ladder().clone(),
            terms: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn ladder(&self) -> &ExponentLadder {
        &self.ladder
    }

    pub fn terms(&self) -> &[ExpansionTerm] {
        &self.terms
    }

    /// Term of order `k` (1-based).
    pub fn term(&self, k: usize) -> Option<&ExpansionTerm> {
        k.checked_sub(1).and_then(|i| self.terms.get(i))
    }

    pub fn order(&self) -> usize {
        self.terms.len()
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// `Σ_{k ≤ n} y_k(t)`.
    pub fn partial_sum(&self, t: f64, n: usize) -> Result<ComplexVec, EngineError> {
        let dim = self.terms.first().map_or(0, |term| term.value.dim());
        let mut sum = ComplexVec::zeros(dim);
        for term in self.terms.iter().take(n) {
            sum += term.value.eval(t)?;
        }
        Ok(sum)
    }

    /// Overwrite the value at order `k` without touching later orders. The
    /// result is generally not an expansion of anything; verification uses it
    /// to check that a wrong term is detected.
    pub fn replace_term(&mut self, k: usize, value: TermValue) -> Result<(), EngineError> {
        let order = self.terms.len();
        let term = k
            .checked_sub(1)
            .and_then(|i| self.terms.get_mut(i))
            .ok_or(EngineError::OrderOutOfRange { k, order })?;
        if value.dim() != term.value.dim()
            || std::mem::discriminant(&value) != std::mem::discriminant(&term.value)
        {
            return Err(EngineError::TermShape { k });
        }
        term.value = value;
        Ok(())
    }

    /// Compute further orders up to `order`. Stored terms are never modified.
    pub fn extend_to(&mut self, spec: &ProblemSpec, order: usize) -> Result<(), EngineError> {
        if order > self.ladder.len() {
            return Err(EngineError::LadderOverflow {
                needed: order,
                realized: self.ladder.len(),
                cutoff: self.ladder.cutoff(),
            });
        }
        for k in self.terms.len() + 1..=order {
            self.note_arity(spec, k);
            let term = self.next_term(spec, k)?;
            self.terms.push(term);
        }
        Ok(())
    }

    fn note_arity(&mut self, spec: &ProblemSpec, k: usize) {
        let supplied = spec.max_arity();
        if supplied == 0 || self.notes.iter().any(|n| n.starts_with("arity")) {
            return;
        }
        let mu = self.ladder.values()[k - 1];
        let longest = (mu / self.ladder.values()[0] + 1e-9).floor() as usize;
        if longest > supplied {
            self.notes.push(format!(
                "arity: from order {k} (rate {mu}) decompositions reach {longest} factors; \
                 the nonlinearity is supplied up to degree {supplied}"
            ));
        }
    }

    fn next_term(&self, spec: &ProblemSpec, k: usize) -> Result<ExpansionTerm, EngineError> {
        let mu = self.ladder.values()[k - 1];
        let rhs = self.rhs(spec, k)?;
        let (value, resonant_modes) = match rhs {
            TermValue::Exp(r) => {
                let sol = resolvent_solve_exp(spec.a(), &r, ResonancePolicy::default())?;
                if !sol.particular.in_class(-mu) {
                    return Err(EngineError::ClassViolation { k, mu });
                }
                (TermValue::Exp(sol.particular), sol.resonant_modes)
            }
            TermValue::LogPower(r) => {
                let q = r.op_za(spec.a())?;
                let m_star = spec.mode().m_star().expect("log-power terms carry m*");
                if !q.in_class(m_star, -mu) {
                    return Err(EngineError::ClassViolation { k, mu });
                }
                (TermValue::LogPower(q), Vec::new())
            }
        };
        Ok(ExpansionTerm {
            mu,
            value,
            resonant_modes,
            depth: spec.depth(k),
        })
    }

    /// Right-hand side at order `k` from the stored terms of lower order:
    /// `J_k + f_k` in exponential mode, `J_k + p_k - χ_k` in power mode and
    /// `J_k + p_k` in log mode.
    pub fn rhs(&self, spec: &ProblemSpec, k: usize) -> Result<TermValue, EngineError> {
        if k == 0 || k > self.terms.len() + 1 {
            return Err(EngineError::OrderOutOfRange {
                k,
                order: self.terms.len() + 1,
            });
        }
        let n = spec.dim();
        let pieces = self.nonlinear_pieces(spec, k)?;
        match spec.mode() {
            Mode::Exponential => {
                let mut raw = Vec::new();
                for piece in pieces.iter().chain(spec.forcing_at(k)) {
                    let s = piece.as_exp().expect("exponential mode");
                    raw.extend(s.terms().cloned());
                }
                Ok(TermValue::Exp(ExpPolySum::canonicalize(n, raw)))
            }
            mode => {
                let depth = spec.depth(k);
                let mut raw = Vec::new();
                for piece in pieces.iter().chain(spec.forcing_at(k)) {
                    let s = piece
                        .as_log_power()
                        .expect("log-power mode")
                        .embed_depth(depth)?;
                    raw.extend(s.terms().cloned());
                }
                if mode == Mode::Power {
                    if let Some(chi) = self.shift_term(k)? {
                        let chi = chi.embed_depth(depth)?;
                        raw.extend(chi.terms().map(|t| {
                            let mut t = t.clone();
                            t.coeff = -t.coeff;
                            t
                        }));
                    }
                }
                Ok(TermValue::LogPower(LogPowerSum::canonicalize(
                    n, depth, raw,
                )?))
            }
        }
    }

    /// `χ_k = 𝓡 q_λ` for the unique `λ < k` with `μ_λ + 1 = μ_k`.
    fn shift_term(&self, k: usize) -> Result<Option<LogPowerSum>, EngineError> {
        let mu = self.ladder.values()[k - 1];
        let mut matches = (0..k - 1).filter(|&l| same_rate(self.ladder.values()[l] + 1.0, mu));
        let Some(l) = matches.next() else {
            return Ok(None);
        };
        if matches.next().is_some() {
            return Err(EngineError::AmbiguousShift { k });
        }
        let q = self.terms[l].value.as_log_power().expect("log-power mode");
        Ok(Some(q.op_r()?))
    }

    /// `𝒢_m(y_{j_1}, …, y_{j_m})` for every map and every ordered tuple of
    /// lower orders whose rates sum to `μ_k`.
    fn nonlinear_pieces(
        &self,
        spec: &ProblemSpec,
        k: usize,
    ) -> Result<Vec<TermValue>, EngineError> {
        let jobs: Vec<(usize, Vec<usize>)> = spec
            .nonlinearity()
            .iter()
            .enumerate()
            .flat_map(|(i, map)| {
                self.ladder
                    .ordered_tuples(k - 1, map.arity())
                    .into_iter()
                    .map(move |tuple| (i, tuple))
            })
            .collect();
        jobs.par_iter()
            .map(|(i, tuple)| {
                let map = &spec.nonlinearity()[*i];
                let args: Vec<&TermValue> = tuple.iter().map(|&j| &self.terms[j].value).collect();
                Ok(match args[0] {
                    TermValue::Exp(_) => {
                        let args: Vec<&ExpPolySum> =
                            args.iter().map(|a| a.as_exp().unwrap()).collect();
                        TermValue::Exp(ExpPolySum::mul_apply(map, &args)?)
                    }
                    TermValue::LogPower(_) => {
                        let args: Vec<&LogPowerSum> =
                            args.iter().map(|a| a.as_log_power().unwrap()).collect();
                        TermValue::LogPower(LogPowerSum::mul_apply(map, &args)?)
                    }
                })
            })
            .collect()
    }

    /// Add `Σ c_i b_i` to the term of order `k` (exponential mode), then
    /// recompute every later order so the expansion stays consistent.
    pub fn apply_free_constants(
        &mut self,
        spec: &ProblemSpec,
        k: usize,
        constants: &[C64],
    ) -> Result<(), EngineError> {
        if self.mode != Mode::Exponential {
            return Err(EngineError::WrongMode {
                expected: "exponential",
            });
        }
        let order = self.terms.len();
        let term = self
            .term(k)
            .ok_or(EngineError::OrderOutOfRange { k, order })?;
        if term.resonant_modes.len() != constants.len() {
            return Err(EngineError::FreeConstants {
                k,
                modes: term.resonant_modes.len(),
                given: constants.len(),
            });
        }
        let mut y = term.value.as_exp().expect("exponential mode").clone();
        for (b, &c) in term.resonant_modes.iter().zip(constants) {
            y = &y + &b.scale(c);
        }
        self.terms[k - 1].value = TermValue::Exp(y);
        self.terms.truncate(k);
        self.extend_to(spec, order)
    }
}
