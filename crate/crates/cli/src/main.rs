use std::path::PathBuf;
use std::process::ExitCode;

use asymptotics_cli::commands::{cmd_certificate, cmd_expand, cmd_realify, cmd_verify};
use asymptotics_cli::config::{Format, RunConfig};
use asymptotics_cli::CliError;
use clap::{Parser, Subcommand};

/// Asymptotic expansions of y' = -Ay + G(y) + f(t).
#[derive(Debug, Parser)]
#[command(name = "asymptotics", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override `expansion.order`.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format; overrides `output.format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the expansion and print the term table.
    Expand,
    /// Compare the expansion with a numerical trajectory.
    Verify,
    /// Convert the expansion to real form.
    Realify,
    /// Compute the smallness certificate.
    Certificate,
}

/// Number of worker threads, read from this variable when set.
const THREADS_VAR: &str = "ASYMPTOTICS_THREADS";

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Validation(format!("{THREADS_VAR}: not a number: {v}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(asymptotics_cli::runtime)?;
    }
    let path = cli
        .config
        .ok_or_else(|| CliError::Validation("--config is required".into()))?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(order) = cli.order {
        cfg.expansion.order = order;
    }
    let format = cli.format.unwrap_or(cfg.output.format);
    let out = cli
        .out
        .or_else(|| cfg.output.dir.clone().map(PathBuf::from));

    macro_rules! emit {
        ($report:expr) => {{
            let report = $report;
            print!("{}", report.render(format)?);
            if let Some(dir) = &out {
                report.write(dir, format)?;
            }
            report
        }};
    }
    Ok(match cli.command {
        Command::Expand => {
            emit!(cmd_expand(&cfg)?);
            true
        }
        Command::Verify => emit!(cmd_verify(&cfg)?).passed,
        Command::Realify => {
            emit!(cmd_realify(&cfg)?);
            true
        }
        Command::Certificate => {
            emit!(cmd_certificate(&cfg)?);
            true
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
