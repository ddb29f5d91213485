//! Human-readable term strings and table rendering.
//!
//! Ladder variables print as `e^{αt}`, `t^α`, `ln(t)^α`, `ln(ln(t))^α`, …
//! Unit coefficients and unit powers are omitted.

use std::fmt::Write;

use asymptotics_core::linalg::{ComplexVec, C64};
use asymptotics_core::realify::{RealLogPower, RealSPoly};
use asymptotics_core::{ExpPolySum, LogPowerSum, TermValue};

/// Shortest round-trip decimal for `x`, with `-0` printed as `0`.
pub fn real(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

/// `a`, `bi`, or `a+bi`.
pub fn complex(z: C64) -> String {
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => real(z.re),
        (true, false) => format!("{}i", imag_part(z.im)),
        (false, false) => {
            let sign = if z.im < 0.0 { '-' } else { '+' };
            format!("{}{sign}{}i", real(z.re), imag_part(z.im.abs()))
        }
    }
}

fn imag_part(x: f64) -> String {
    match x {
        1.0 => String::new(),
        -1.0 => "-".into(),
        _ => real(x),
    }
}

fn is_one(z: C64) -> bool {
    z == C64::new(1.0, 0.0)
}

/// Coefficient prefix, or `None` when it is a unit scalar.
fn coefficient(v: &ComplexVec) -> Option<String> {
    if v.len() == 1 {
        let z = v[0];
        if is_one(z) {
            return None;
        }
        return Some(if z.re != 0.0 && z.im != 0.0 {
            format!("({})", complex(z))
        } else {
            complex(z)
        });
    }
    let parts: Vec<String> = v.iter().map(|&z| complex(z)).collect();
    Some(format!("({})", parts.join(",")))
}

fn real_coefficient(v: &[f64]) -> Option<String> {
    match v {
        [x] if *x == 1.0 => None,
        [x] => Some(real(*x)),
        _ => Some(format!(
            "({})",
            v.iter().map(|&x| real(x)).collect::<Vec<_>>().join(",")
        )),
    }
}

/// Exponent attached to `^`: bare for simple reals, braced otherwise.
fn power(z: C64) -> String {
    let s = complex(z);
    if z.im == 0.0 && z.re >= 0.0 && !s.contains('.') && s.len() == 1 {
        s
    } else if z.im == 0.0 {
        format!("{{{s}}}")
    } else {
        format!("{{({s})}}")
    }
}

/// Name of the ladder variable `z_j`: `t` for `j = 0`, then nested logs.
pub fn ladder_var(j: i32) -> String {
    let mut s = "t".to_string();
    for _ in 0..j {
        s = format!("ln({s})");
    }
    s
}

fn ladder_factor(j: i32, a: C64) -> Option<String> {
    if a == C64::new(0.0, 0.0) {
        return None;
    }
    if j == -1 {
        let rate = match (a.re, a.im) {
            (1.0, 0.0) => String::new(),
            (-1.0, 0.0) => "-".into(),
            (_, 0.0) => real(a.re),
            _ => format!("({})", complex(a)),
        };
        return Some(format!("e^{{{rate}t}}"));
    }
    let var = ladder_var(j);
    Some(if is_one(a) {
        var
    } else {
        format!("{var}^{}", power(a))
    })
}

fn join(factors: Vec<String>) -> String {
    if factors.is_empty() {
        "1".into()
    } else {
        factors.join("·")
    }
}

fn join_sum(terms: Vec<String>) -> String {
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        match (i, t.strip_prefix('-')) {
            (0, _) => out.push_str(t),
            (_, Some(rest)) => {
                out.push_str(" - ");
                out.push_str(rest);
            }
            (_, None) => {
                out.push_str(" + ");
                out.push_str(t);
            }
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

pub fn exp_poly(s: &ExpPolySum) -> String {
    let mut out = Vec::new();
    for term in s.terms() {
        for (m, c) in term.coeffs.iter().enumerate() {
            if c.iter().all(|z| z.norm() == 0.0) {
                continue;
            }
            let mut f: Vec<String> = coefficient(c).into_iter().collect();
            match m {
                0 => {}
                1 => f.push("t".into()),
                _ => f.push(format!("t^{m}")),
            }
            f.extend(ladder_factor(-1, term.exponent));
            out.push(join(f));
        }
    }
    join_sum(out)
}

pub fn log_power(s: &LogPowerSum) -> String {
    let out = s
        .terms()
        .map(|term| {
            let mut f: Vec<String> = coefficient(&term.coeff).into_iter().collect();
            for (i, &a) in term.exponent.components().iter().enumerate() {
                f.extend(ladder_factor(i as i32 - 1, a));
            }
            join(f)
        })
        .collect();
    join_sum(out)
}

pub fn term_value(v: &TermValue) -> String {
    match v {
        TermValue::Exp(s) => exp_poly(s),
        TermValue::LogPower(s) => log_power(s),
    }
}

fn trig(phase: &str, w: f64, var: &str) -> String {
    if w == 1.0 {
        format!("{phase}({var})")
    } else {
        format!("{phase}({}·{var})", real(w))
    }
}

pub fn real_spoly(s: &RealSPoly) -> String {
    let out = s
        .terms()
        .map(|t| {
            let mut f: Vec<String> = real_coefficient(t.vector.as_slice()).into_iter().collect();
            match t.power {
                0 => {}
                1 => f.push("t".into()),
                m => f.push(format!("t^{m}")),
            }
            if t.frequency != 0.0 {
                f.push(trig(t.phase.name(), t.frequency, "t"));
            }
            join(f)
        })
        .collect();
    join_sum(out)
}

pub fn real_log_power(s: &RealLogPower) -> String {
    let out = s
        .terms()
        .map(|t| {
            let mut f: Vec<String> = real_coefficient(t.coeff.as_slice()).into_iter().collect();
            for (j, (&w, phase)) in t.frequencies.iter().zip(&t.phases).enumerate() {
                if w != 0.0 {
                    f.push(trig(phase.name(), w, &ladder_var(j as i32)));
                }
            }
            for (i, &a) in t.exponent.iter().enumerate() {
                f.extend(ladder_factor(i as i32 - 1, C64::new(a, 0.0)));
            }
            join(f)
        })
        .collect();
    join_sum(out)
}

/// Fixed-width text table; the first row is the header.
pub fn text_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| {
                let pad = widths[c] - s.chars().count();
                format!("{s}{}", " ".repeat(pad))
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            let _ = writeln!(out, "{}", rule.join("  "));
        }
    }
    out
}

/// CSV with a header row and LF line endings.
pub fn csv_table(rows: &[Vec<String>]) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Float cell with 17 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use asymptotics_core::linalg::cvec;
    use asymptotics_core::ExponentVector;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn power_terms() {
        let p = LogPowerSum::scalar_monomial(&[0.0, -2.0], c(2.0, 0.0));
        assert_eq!(log_power(&p), "2·t^{-2}");
        let p = LogPowerSum::scalar_monomial(&[0.0, -1.0], c(1.0, 0.0));
        assert_eq!(log_power(&p), "t^{-1}");
    }

    #[test]
    fn oscillating_exponential() {
        let s = ExpPolySum::single(c(-1.0, 2.0), vec![cvec(&[c(0.0, 0.0), c(-1.0, 0.0)])]);
        assert_eq!(exp_poly(&s), "(0,-1)·e^{(-1+2i)t}");
        let s = ExpPolySum::scalar(c(-2.0, 0.0), &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(exp_poly(&s), "t·e^{-2t}");
        assert_eq!(exp_poly(&ExpPolySum::zero(1)), "0");
    }

    #[test]
    fn nested_logs() {
        let p = LogPowerSum::monomial(
            ExponentVector::from_real(&[0.0, 0.0, -0.5, 2.0]),
            cvec(&[c(1.0, 0.0)]),
        );
        assert_eq!(log_power(&p), "ln(t)^{-0.5}·ln(ln(t))^2");
    }

    #[test]
    fn complex_numbers() {
        assert_eq!(complex(c(0.5, -1.0)), "0.5-i");
        assert_eq!(complex(c(0.0, 2.0)), "2i");
        assert_eq!(complex(c(-0.0, 0.0)), "0");
    }

    #[test]
    fn csv_uses_lf() {
        let s = csv_table(&[vec!["a".into(), "b".into()], vec![sci(1.0), sci(0.1)]]).unwrap();
        assert_eq!(s, "a,b\n1.0000000000000000e0,1.0000000000000001e-1\n");
    }
}
