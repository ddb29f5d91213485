//! Structured text records for sums, real forms, expansions and numeric
//! summaries. Floats are written with 17 significant digits so that every
//! value reads back to the same `f64`.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::engine::{Expansion, ExpansionTerm, Mode, TermValue};
use crate::funclasses::{
    ClassError, ExpPolySum, ExpPolyTerm, ExponentVector, LogPowerSum, LogPowerTerm,
};
use crate::linalg::{ComplexVec, C64};
use crate::realify::{Phase, RealLogPower, RealLogTerm, RealSPoly, RealifyError, SPolyTerm};

/// JSON formatter printing floats as `{:.16e}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RoundTripFormatter;

impl Formatter for RoundTripFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.8e}")
    }
}

/// Compact JSON of `value` using [`RoundTripFormatter`].
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, RoundTripFormatter);
    value
        .serialize(&mut ser)
        .expect("records serialize infallibly");
    String::from_utf8(out).expect("JSON is UTF-8")
}

pub fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, serde_json::Error> {
    serde_json::from_str(text)
}

type Pair = [f64; 2];

fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn unpair(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn pairs(v: &ComplexVec) -> Vec<Pair> {
    v.iter().map(|&z| pair(z)).collect()
}

fn unpairs(v: &[Pair]) -> ComplexVec {
    ComplexVec::from_iterator(v.len(), v.iter().map(|&p| unpair(p)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyRecord {
    pub exponent: Pair,
    /// `coefficients[m]` is the vector multiplying `t^m`.
    pub coefficients: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPowerRecord {
    /// Components `α_{-1}, α_0, …, α_k`.
    pub exponent: Vec<Pair>,
    pub coefficient: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SumRecord {
    ExpPoly {
        dim: usize,
        terms: Vec<ExpPolyRecord>,
    },
    LogPower {
        dim: usize,
        depth: i32,
        terms: Vec<LogPowerRecord>,
    },
}

impl From<&ExpPolySum> for SumRecord {
    fn from(s: &ExpPolySum) -> Self {
        SumRecord::ExpPoly {
            dim: s.dim(),
            terms: s
                .terms()
                .map(|t| ExpPolyRecord {
                    exponent: pair(t.exponent),
                    coefficients: t.coeffs.iter().map(pairs).collect(),
                })
                .collect(),
        }
    }
}

impl From<&LogPowerSum> for SumRecord {
    fn from(s: &LogPowerSum) -> Self {
        SumRecord::LogPower {
            dim: s.dim(),
            depth: s.depth(),
            terms: s
                .terms()
                .map(|t| LogPowerRecord {
                    exponent: t.exponent.components().iter().map(|&z| pair(z)).collect(),
                    coefficient: pairs(&t.coeff),
                })
                .collect(),
        }
    }
}

impl From<&TermValue> for SumRecord {
    fn from(v: &TermValue) -> Self {
        match v {
            TermValue::Exp(s) => s.into(),
            TermValue::LogPower(s) => s.into(),
        }
    }
}

impl SumRecord {
    pub fn to_term_value(&self) -> Result<TermValue, ClassError> {
        match self {
            SumRecord::ExpPoly { dim, terms } => {
                for t in terms {
                    if let Some(c) = t.coefficients.iter().find(|c| c.len() != *dim) {
                        return Err(ClassError::DimensionMismatch {
                            expected: *dim,
                            got: c.len(),
                        });
                    }
                }
                Ok(TermValue::Exp(ExpPolySum::canonicalize(
                    *dim,
                    terms.iter().map(|t| {
                        ExpPolyTerm::new(
                            unpair(t.exponent),
                            t.coefficients.iter().map(|c| unpairs(c)).collect(),
                        )
                    }),
                )))
            }
            SumRecord::LogPower { dim, depth, terms } => {
                Ok(TermValue::LogPower(LogPowerSum::canonicalize(
                    *dim,
                    *depth,
                    terms.iter().map(|t| {
                        LogPowerTerm::new(
                            ExponentVector::new(t.exponent.iter().map(|&p| unpair(p)).collect()),
                            unpairs(&t.coefficient),
                        )
                    }),
                )?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SPolyRecord {
    pub power: usize,
    pub frequency: f64,
    pub phase: Phase,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealSPolyRecord {
    pub dim: usize,
    pub terms: Vec<SPolyRecord>,
}

impl From<&RealSPoly> for RealSPolyRecord {
    fn from(s: &RealSPoly) -> Self {
        RealSPolyRecord {
            dim: s.dim(),
            terms: s
                .terms()
                .map(|t| SPolyRecord {
                    power: t.power,
                    frequency: t.frequency,
                    phase: t.phase,
                    vector: t.vector.iter().copied().collect(),
                })
                .collect(),
        }
    }
}

impl RealSPolyRecord {
    pub fn to_spoly(&self) -> Result<RealSPoly, RealifyError> {
        RealSPoly::canonicalize(
            self.dim,
            self.terms.iter().map(|t| SPolyTerm {
                power: t.power,
                frequency: t.frequency,
                phase: t.phase,
                vector: t.vector.clone().into(),
            }),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealLogRecord {
    pub exponent: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub phases: Vec<Phase>,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealLogPowerRecord {
    pub dim: usize,
    pub depth: i32,
    pub terms: Vec<RealLogRecord>,
}

impl From<&RealLogPower> for RealLogPowerRecord {
    fn from(s: &RealLogPower) -> Self {
        RealLogPowerRecord {
            dim: s.dim(),
            depth: s.depth(),
            terms: s
                .terms()
                .map(|t| RealLogRecord {
                    exponent: t.exponent.clone(),
                    frequencies: t.frequencies.clone(),
                    phases: t.phases.clone(),
                    vector: t.coeff.iter().copied().collect(),
                })
                .collect(),
        }
    }
}

impl RealLogPowerRecord {
    pub fn to_real_logpower(&self) -> Result<RealLogPower, RealifyError> {
        RealLogPower::canonicalize(
            self.dim,
            self.depth,
            self.terms.iter().map(|t| RealLogTerm {
                exponent: t.exponent.clone(),
                frequencies: t.frequencies.clone(),
                phases: t.phases.clone(),
                coeff: t.vector.clone().into(),
            }),
        )
    }
}

/// One expansion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub k: usize,
    pub mu: f64,
    pub depth: i32,
    pub value: SumRecord,
    pub resonant_modes: Vec<SumRecord>,
}

impl TermRecord {
    pub fn new(k: usize, term: &ExpansionTerm) -> Self {
        TermRecord {
            k,
            mu: term.mu,
            depth: term.depth,
            value: (&term.value).into(),
            resonant_modes: term.resonant_modes.iter().map(SumRecord::from).collect(),
        }
    }
}

/// Mode name and decay index as written in expansion headers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionHeader {
    pub mode: String,
    pub m_star: Option<i32>,
    pub order: usize,
    pub ladder: Vec<f64>,
    pub notes: Vec<String>,
}

/// Header line followed by one line per term.
pub fn expansion_to_jsonl(expansion: &Expansion) -> String {
    let mode: Mode = expansion.mode();
    let header = ExpansionHeader {
        mode: mode.name().to_string(),
        m_star: mode.m_star(),
        order: expansion.order(),
        ladder: expansion.ladder().values()[..expansion.order()].to_vec(),
        notes: expansion.notes().to_vec(),
    };
    let mut out = to_json(&header);
    out.push('\n');
    for (i, term) in expansion.terms().iter().enumerate() {
        out.push_str(&to_json(&TermRecord::new(i + 1, term)));
        out.push('\n');
    }
    out
}

/// Parse the output of [`expansion_to_jsonl`].
pub fn expansion_from_jsonl(
    text: &str,
) -> Result<(ExpansionHeader, Vec<TermRecord>), serde_json::Error> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = from_json(lines.next().unwrap_or("null"))?;
    let terms = lines.map(from_json).collect::<Result<_, _>>()?;
    Ok((header, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{expand, MultiLinearMap, ProblemSpec};
    use crate::linalg::{rmat, rvec};

    #[test]
    fn floats_round_trip_exactly() {
        let values = [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE];
        let text = to_json(&values.to_vec());
        assert!(text.contains("1.0000000000000001e-1"));
        let back: Vec<f64> = from_json(&text).unwrap();
        assert_eq!(back, values);
    }

    #[test]
    fn sums_round_trip() {
        let s = &ExpPolySum::single(
            C64::new(-1.0, 2.0),
            vec![rvec(&[1.0, 0.3]), rvec(&[0.0, 1.0 / 7.0])],
        ) + &ExpPolySum::single(C64::new(-1.0, -2.0), vec![rvec(&[1.0, 0.3])]);
        let rec = SumRecord::from(&s);
        let back: SumRecord = from_json(&to_json(&rec)).unwrap();
        assert_eq!(back.to_term_value().unwrap(), TermValue::Exp(s));

        let p = LogPowerSum::monomial(
            ExponentVector::new(vec![
                C64::new(0.0, 1.5),
                C64::new(-1.0, 0.0),
                C64::new(0.25, 0.0),
            ]),
            rvec(&[2.0 / 3.0]),
        );
        let back: SumRecord = from_json(&to_json(&SumRecord::from(&p))).unwrap();
        assert_eq!(back.to_term_value().unwrap(), TermValue::LogPower(p));
    }

    #[test]
    fn expansion_lines() {
        let spec = ProblemSpec::builder(rmat(&[&[2.0]]), Mode::Exponential)
            .nonlinearity(MultiLinearMap::scalar_power(2))
            .forcing_exp(1.0, ExpPolySum::scalar(C64::from(-1.0), &[C64::from(1.0)]))
            .order(3)
            .build()
            .unwrap();
        let e = expand(&spec).unwrap();
        let text = expansion_to_jsonl(&e);
        assert_eq!(text.lines().count(), 4);
        let (header, terms) = expansion_from_jsonl(&text).unwrap();
        assert_eq!(header.mode, "exponential");
        assert_eq!(header.ladder, vec![1.0, 2.0, 3.0]);
        for (rec, term) in terms.iter().zip(e.terms()) {
            assert_eq!(rec.value.to_term_value().unwrap(), term.value);
        }
        assert_eq!(terms[1].resonant_modes.len(), 1);
    }
}
