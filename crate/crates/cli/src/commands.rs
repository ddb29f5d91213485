//! The four subcommands. Each returns a report that renders as a table and
//! knows which files it writes.

use std::path::Path;

use asymptotics_core::engine::{expand, Expansion};
use asymptotics_core::funclasses::{iterated_exp_zero, ladder_eval};
use asymptotics_core::linalg::{ComplexVec, C64};
use asymptotics_core::numerics::{
    fit_resonant_constants, integrate, remainder_series, smallness_certificate, RemainderSeries,
    ResonantFit,
};
use asymptotics_core::realify::{check_conjugation_symmetry, to_real_logpower, to_real_spoly};
use asymptotics_core::serial::{expansion_to_jsonl, to_json};
use asymptotics_core::{
    DecayFit, ExpPolySum, LogPowerSum, Mode, ProblemSpec, RealLogPower, RealSPoly, Regressor,
    SmallnessCertificate, TermValue, Trajectory,
};

use crate::config::{Format, RunConfig};
use crate::format::{self as fmt, csv_table, sci, text_table};
use crate::{runtime, CliError};

fn render(rows: &[Vec<String>], format: Format) -> Result<String, CliError> {
    match format {
        Format::Txt => Ok(text_table(rows)),
        Format::Csv => csv_table(rows).map_err(runtime),
    }
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Txt => "txt",
        Format::Csv => "csv",
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(runtime)?;
    std::fs::write(dir.join(name), contents)
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", dir.join(name).display())))
}

fn class_name(mode: Mode, mu: f64, depth: i32) -> String {
    let mu = fmt::real(mu);
    match mode {
        Mode::Exponential => format!("E_{mu}"),
        Mode::Power => format!("P_{mu} (depth {depth})"),
        Mode::Log { m_star } => format!("P^{m_star}_{mu} (depth {depth})"),
    }
}

#[derive(Debug, Clone)]
pub struct ExpandReport {
    pub expansion: Expansion,
}

impl ExpandReport {
    pub fn rows(&self) -> Vec<Vec<String>> {
        let mode = self.expansion.mode();
        let mut rows = vec![vec![
            "k".to_string(),
            "mu".into(),
            "class".into(),
            "term".into(),
            "resonant_modes".into(),
        ]];
        for (i, t) in self.expansion.terms().iter().enumerate() {
            let modes: Vec<String> = t.resonant_modes.iter().map(fmt::exp_poly).collect();
            rows.push(vec![
                (i + 1).to_string(),
                fmt::real(t.mu),
                class_name(mode, t.mu, t.depth),
                fmt::term_value(&t.value),
                modes.join("; "),
            ]);
        }
        rows
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let mut out = render(&self.rows(), format)?;
        if format == Format::Txt {
            for note in self.expansion.notes() {
                out.push_str(&format!("note: {note}\n"));
            }
        }
        Ok(out)
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<(), CliError> {
        write(dir, "expansion.jsonl", &expansion_to_jsonl(&self.expansion))?;
        write(
            dir,
            &format!("terms.{}", extension(format)),
            &self.render(format)?,
        )
    }
}

pub fn cmd_expand(cfg: &RunConfig) -> Result<ExpandReport, CliError> {
    let spec = cfg.problem_spec()?;
    let expansion = expand(&spec).map_err(runtime)?;
    Ok(ExpandReport { expansion })
}

#[derive(Debug, Clone)]
pub struct VerifyRow {
    /// Number of expansion terms subtracted.
    pub n: usize,
    /// The fit must reach `threshold = μ_{max(n,1)} - margin`.
    pub threshold: f64,
    pub fit: Result<DecayFit, String>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    /// Fitted free constants per resonant order.
    pub resonant: Vec<(usize, ResonantFit)>,
    pub remainders: Vec<RemainderSeries>,
    pub trajectory: Trajectory,
    pub expansion: Expansion,
    pub passed: bool,
}

impl VerifyReport {
    pub fn rows(&self) -> Vec<Vec<String>> {
        let mut rows = vec![vec![
            "N".to_string(),
            "threshold".into(),
            "exponent".into(),
            "r_squared".into(),
            "samples".into(),
            "verdict".into(),
        ]];
        for r in &self.rows {
            let (e, r2, s) = match &r.fit {
                Ok(f) => (sci(f.exponent), sci(f.r_squared), f.samples.to_string()),
                Err(msg) => (format!("error: {msg}"), String::new(), "0".into()),
            };
            let verdict = if r.pass { "pass" } else { "fail" };
            rows.push(vec![
                r.n.to_string(),
                sci(r.threshold),
                e,
                r2,
                s,
                verdict.into(),
            ]);
        }
        rows
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let mut out = render(&self.rows(), format)?;
        if format == Format::Txt {
            for (k, fit) in &self.resonant {
                let cs: Vec<String> = fit.coefficients.iter().map(|&c| fmt::complex(c)).collect();
                out.push_str(&format!(
                    "resonant constants at k={k}: [{}], relative uncertainty {:?}\n",
                    cs.join(", "),
                    fit.relative_uncertainty
                ));
            }
        }
        Ok(out)
    }

    /// Remainder norms `|y - Σ_{k≤N} y_k|` per time sample.
    pub fn remainder_csv(&self) -> Result<String, CliError> {
        let mut header = vec!["t".to_string()];
        header.extend((0..self.remainders.len()).map(|n| format!("r{n}")));
        header.push("floor".into());
        let mut rows = vec![header];
        if let Some(first) = self.remainders.first() {
            for (i, &t) in first.times.iter().enumerate() {
                let mut row = vec![sci(t)];
                row.extend(self.remainders.iter().map(|r| sci(r.values[i])));
                row.push(sci(first.floors[i]));
                rows.push(row);
            }
        }
        csv_table(&rows).map_err(runtime)
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<(), CliError> {
        write(dir, "remainders.csv", &self.remainder_csv()?)?;
        let mut traj = Vec::new();
        self.trajectory
            .write_csv(&mut traj, None)
            .map_err(runtime)?;
        write(dir, "trajectory.csv", &String::from_utf8_lossy(&traj))?;
        write(
            dir,
            &format!("fits.{}", extension(format)),
            &self.render(format)?,
        )
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let spec = cfg.problem_spec()?;
    let expansion = expand(&spec).map_err(runtime)?;
    verify_expansion(cfg, &spec, expansion)
}

/// Verification of a given expansion (which may differ from the computed one).
pub fn verify_expansion(
    cfg: &RunConfig,
    spec: &ProblemSpec,
    mut expansion: Expansion,
) -> Result<VerifyReport, CliError> {
    let v = cfg
        .verification
        .as_ref()
        .ok_or_else(|| CliError::Validation("verification: section is required".into()))?;
    let y0 = cfg.y0()?;
    if y0.len() != spec.dim() {
        return Err(CliError::Validation(format!(
            "verification.y0: expected {} components, got {}",
            spec.dim(),
            y0.len()
        )));
    }
    let [t0, t1] = v.t_span;
    if !t0.is_finite() || !t1.is_finite() || t1 <= t0 {
        return Err(CliError::Validation(
            "verification.t_span: end must exceed start".into(),
        ));
    }
    let trajectory = integrate(spec, &y0, (t0, t1), v.rel_tol, v.abs_tol).map_err(runtime)?;
    let mut resonant = Vec::new();
    if v.fit_resonant && expansion.mode() == Mode::Exponential {
        let window = v.resonant_window.map(|[a, b]| (a, b));
        for k in 1..=expansion.order() {
            if expansion.terms()[k - 1].resonant_modes.is_empty() {
                continue;
            }
            let fit =
                fit_resonant_constants(&trajectory, &expansion, k, window).map_err(runtime)?;
            expansion
                .apply_free_constants(spec, k, &fit.coefficients)
                .map_err(runtime)?;
            resonant.push((k, fit));
        }
    }
    let regressor = Regressor::for_mode(expansion.mode());
    let window = v.window.map(|[a, b]| (a, b));
    let mut rows = Vec::new();
    let mut remainders = Vec::new();
    for n in 0..=expansion.order() {
        let series = remainder_series(&trajectory, &expansion, n).map_err(runtime)?;
        let mu = expansion.terms()[n.max(1) - 1].mu;
        let threshold = mu - v.margin;
        let fit = series.fit(regressor, window).map_err(|e| e.to_string());
        let pass = matches!(&fit, Ok(f) if f.exponent >= threshold);
        rows.push(VerifyRow {
            n,
            threshold,
            fit,
            pass,
        });
        remainders.push(series);
    }
    let passed = rows.iter().all(|r| r.pass);
    Ok(VerifyReport {
        rows,
        resonant,
        remainders,
        trajectory,
        expansion,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum RealForm {
    /// `y_k = e^{-μ_k t} · s(t)`.
    SPoly(RealSPoly),
    /// `y_k = q(𝓛(t)) · L_{m*}(t)^{-μ_k}`.
    LogPower(RealLogPower),
}

#[derive(Debug, Clone)]
pub struct RealRow {
    pub k: usize,
    pub mu: f64,
    pub form: RealForm,
    /// Class membership of the real form (log mode: `α_j = 0` for `j ≤ m*`).
    pub in_class: bool,
}

#[derive(Debug, Clone)]
pub struct RealifyReport {
    pub mode: Mode,
    pub rows: Vec<RealRow>,
    pub samples: Vec<f64>,
    /// Largest `|Im y_k(t)|` over orders and samples.
    pub max_imag_residue: f64,
    /// Largest difference between the real form and `Re y_k(t)`.
    pub max_real_mismatch: f64,
}

impl RealifyReport {
    pub fn rows(&self) -> Vec<Vec<String>> {
        let scale = match self.mode {
            Mode::Exponential => "e^{-mu·t}".to_string(),
            Mode::Power => "t^{-mu}".into(),
            Mode::Log { m_star } => format!("{}^{{-mu}}", fmt::ladder_var(m_star)),
        };
        let mut rows = vec![vec![
            "k".to_string(),
            "mu".into(),
            "scale".into(),
            "in_class".into(),
            "real_form".into(),
        ]];
        for r in &self.rows {
            let form = match &r.form {
                RealForm::SPoly(s) => fmt::real_spoly(s),
                RealForm::LogPower(q) => fmt::real_log_power(q),
            };
            rows.push(vec![
                r.k.to_string(),
                fmt::real(r.mu),
                scale.clone(),
                r.in_class.to_string(),
                form,
            ]);
        }
        rows
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let mut out = render(&self.rows(), format)?;
        if format == Format::Txt {
            out.push_str(&format!(
                "max imaginary residue: {}\nmax real-form mismatch: {}\n",
                sci(self.max_imag_residue),
                sci(self.max_real_mismatch)
            ));
        }
        Ok(out)
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<(), CliError> {
        write(
            dir,
            &format!("real_terms.{}", extension(format)),
            &self.render(format)?,
        )
    }
}

fn asymmetric_exp(s: &ExpPolySum) -> Vec<String> {
    let conj = s.conj();
    s.terms()
        .filter(|t| {
            let partner = conj.term(t.exponent);
            !partner.is_some_and(|p| {
                ExpPolySum::single(t.exponent, p.coeffs.clone())
                    .approx_eq(&ExpPolySum::single(t.exponent, t.coeffs.clone()), 1e-12)
            })
        })
        .map(|t| fmt::exp_poly(&ExpPolySum::single(t.exponent, t.coeffs.clone())))
        .collect()
}

fn asymmetric_log(s: &LogPowerSum) -> Vec<String> {
    let conj = s.conj();
    s.terms()
        .filter(|t| {
            let partner = conj.coefficient(&t.exponent);
            !partner.is_some_and(|p| (p - &t.coeff).norm() <= 1e-12 * t.coeff.norm())
        })
        .map(|t| fmt::log_power(&LogPowerSum::monomial(t.exponent.clone(), t.coeff.clone())))
        .collect()
}

fn check_real_problem(spec: &ProblemSpec) -> Result<(), CliError> {
    if spec.a().iter().any(|z| z.im != 0.0) {
        return Err(CliError::Validation("problem.a: matrix is not real".into()));
    }
    for (i, map) in spec.nonlinearity().iter().enumerate() {
        if !map.is_real() {
            return Err(CliError::Validation(format!(
                "problem.nonlinearity[{i}]: map is not real"
            )));
        }
    }
    for (i, f) in spec.forcing().iter().enumerate() {
        let offending = match &f.value {
            TermValue::Exp(s) if !check_conjugation_symmetry(s) => asymmetric_exp(s),
            TermValue::LogPower(s) if !check_conjugation_symmetry(s) => asymmetric_log(s),
            _ => continue,
        };
        return Err(CliError::Validation(format!(
            "problem.forcing[{i}]: not conjugation symmetric; unmatched terms: {}",
            offending.join(", ")
        )));
    }
    Ok(())
}

fn default_samples(mode: Mode, max_depth: i32) -> Vec<f64> {
    match mode {
        Mode::Exponential => vec![0.5, 1.0, 2.0, 4.0, 8.0],
        _ => {
            let start = 10.0 * iterated_exp_zero(max_depth + 1).max(1.0);
            (0..5).map(|i| start * 10f64.powi(i)).collect()
        }
    }
}

fn real_eval(form: &RealForm, t: f64) -> Result<Vec<f64>, CliError> {
    Ok(match form {
        RealForm::SPoly(s) => s.eval(t).as_slice().to_vec(),
        RealForm::LogPower(q) => q.eval(t).map_err(runtime)?.as_slice().to_vec(),
    })
}

pub fn cmd_realify(cfg: &RunConfig) -> Result<RealifyReport, CliError> {
    let spec = cfg.problem_spec()?;
    check_real_problem(&spec)?;
    let expansion = expand(&spec).map_err(runtime)?;
    let mode = expansion.mode();
    let mut rows = Vec::new();
    for (i, term) in expansion.terms().iter().enumerate() {
        let mu = term.mu;
        let (form, in_class) = match (&term.value, mode) {
            (TermValue::Exp(y), _) => {
                let s = to_real_spoly(&y.shift(C64::new(mu, 0.0))).map_err(runtime)?;
                (RealForm::SPoly(s), true)
            }
            (TermValue::LogPower(y), _) => {
                let m = mode.m_star().unwrap_or(0);
                let q = y.mul_ladder_power(m, C64::new(mu, 0.0)).map_err(runtime)?;
                let r = to_real_logpower(&q).map_err(runtime)?;
                let ok = r.in_class(m);
                (RealForm::LogPower(r), ok)
            }
        };
        rows.push(RealRow {
            k: i + 1,
            mu,
            form,
            in_class,
        });
    }
    let max_depth = rows
        .iter()
        .map(|r| match &r.form {
            RealForm::SPoly(_) => -1,
            RealForm::LogPower(q) => q.depth(),
        })
        .max()
        .unwrap_or(-1);
    let samples = cfg
        .realify
        .samples
        .clone()
        .unwrap_or_else(|| default_samples(mode, max_depth));
    let mut max_imag: f64 = 0.0;
    let mut max_mismatch: f64 = 0.0;
    for &t in &samples {
        let point = ladder_eval(max_depth.max(0), t).map_err(|e| {
            CliError::Validation(format!(
                "realify.samples: t = {t} is outside the domain: {e}"
            ))
        })?;
        for (row, term) in rows.iter().zip(expansion.terms()) {
            let y: ComplexVec = match &term.value {
                TermValue::Exp(s) => s.eval(t),
                TermValue::LogPower(s) => s.eval(t).map_err(runtime)?,
            };
            let scale = match mode {
                Mode::Exponential => (-row.mu * t).exp(),
                _ => (-row.mu * point.log_value(mode.m_star().unwrap_or(0))).exp(),
            };
            let r = real_eval(&row.form, t)?;
            for (z, x) in y.iter().zip(r) {
                max_imag = max_imag.max(z.im.abs());
                max_mismatch = max_mismatch.max((z.re - x * scale).abs());
            }
        }
    }
    Ok(RealifyReport {
        mode,
        rows,
        samples,
        max_imag_residue: max_imag,
        max_real_mismatch: max_mismatch,
    })
}

#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub certificate: SmallnessCertificate,
}

impl CertificateReport {
    pub fn rows(&self) -> Vec<Vec<String>> {
        let c = &self.certificate;
        let mut rows = vec![vec!["quantity".to_string(), "value".into()]];
        for (name, v) in [
            ("lambda1", c.lambda1),
            ("C0", c.c0),
            ("c_star", c.c_star),
            ("r_star", c.r_star),
            ("M", c.m),
            ("eps0", c.eps0),
            ("eps1", c.eps1),
        ] {
            rows.push(vec![name.into(), sci(v)]);
        }
        rows
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        render(&self.rows(), format)
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<(), CliError> {
        write(dir, "certificate.json", &to_json(&self.certificate))?;
        write(
            dir,
            &format!("certificate.{}", extension(format)),
            &self.render(format)?,
        )
    }
}

pub fn cmd_certificate(cfg: &RunConfig) -> Result<CertificateReport, CliError> {
    let c = cfg
        .certificate
        .as_ref()
        .ok_or_else(|| CliError::Validation("certificate: section is required".into()))?;
    let spec = cfg.problem_spec()?;
    let certificate = smallness_certificate(&spec, c.r_star, c.directions)
        .map_err(|e| CliError::Validation(format!("certificate.r_star: {e}")))?;
    Ok(CertificateReport { certificate })
}
