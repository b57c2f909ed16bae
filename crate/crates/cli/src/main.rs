//! `shiftmetrics`: batch reports on distances, approximations, entropy,
//! spectral data and uniqueness certificates.
//!
//! Exit codes: 0 success, 1 other library failure, 2 unreadable or invalid
//! input, 3 capacity exceeded, 4 inconclusive certificate, 5 certificate
//! envelope contradicted.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod json;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use shiftmetrics::Error;

#[derive(Debug, Parser)]
#[command(name = "shiftmetrics", version, about = "Distances and uniqueness certificates for measures on shift spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads. Results do not depend on it; computations currently run on one.
    #[arg(long, default_value_t = 1, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: u32,
    /// Record wall-clock time in `runtime_ms` (otherwise 0, so reports are reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistKind {
    Projective,
    Vague,
    DbarUpper,
    DbarLower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeKind {
    #[value(alias = "long_range")]
    LongRange,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Witness {
    Separability,
    DbarVsRho,
    RhoVsDbar,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enclose a distance between two measures.
    Dist {
        #[arg(long, value_enum)]
        kind: DistKind,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Truncation depth (vague), block length (dbar-lower), horizon cap
        /// (projective between Markov measures) or word length (other
        /// projective pairs).
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Canonical Markov approximations of a g-measure against the variation bound.
    Approx {
        /// g-function spec.
        #[arg(long)]
        a: PathBuf,
        #[arg(long, default_value_t = 6)]
        lmax: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Entropy rate, optionally against a reference measure or a g-function.
    Entropy {
        #[arg(long)]
        a: PathBuf,
        /// Reference Markov measure or g-function spec.
        #[arg(long)]
        b: Option<PathBuf>,
        /// Cylinder depth for the integral of log g.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Birkhoff coefficient and stationary vector of a transfer matrix.
    Spectral {
        /// Matrix, Markov measure or g-function spec.
        #[arg(long)]
        a: PathBuf,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
    },
    /// Uniqueness certificate for an approximation scheme.
    Certify {
        #[arg(long, value_enum, default_value_t = SchemeKind::LongRange)]
        scheme: SchemeKind,
        #[arg(long)]
        beta: Option<f64>,
        /// g-function spec for the table scheme.
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        lmax: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Data for the incomparability witnesses.
    Counterexample {
        #[arg(value_enum)]
        which: Witness,
        /// Prefix length (separability) or truncation depth (dbar-vs-rho).
        #[arg(long)]
        depth: Option<usize>,
        /// Flip periods for dbar-vs-rho.
        #[arg(long, value_delimiter = ',')]
        p: Vec<usize>,
        /// Separability parameter; defaults to the value giving rate 1/2.
        #[arg(long)]
        alpha: Option<f64>,
        /// g-function spec for rho-vs-dbar.
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        lmax: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => 2,
            Error::Capacity { .. } => 3,
            Error::Envelope(_) => 5,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn configure_capacity() -> Result<(), Failure> {
    match std::env::var("SHIFTMETRICS_CAPACITY") {
        Ok(v) => {
            let states: u64 = v
                .trim()
                .parse()
                .map_err(|_| Failure::input(format!("SHIFTMETRICS_CAPACITY must be a positive integer, got {v:?}")))?;
            if states == 0 {
                return Err(Failure::input("SHIFTMETRICS_CAPACITY must be positive"));
            }
            shiftmetrics::capacity::set_limit(states);
            Ok(())
        }
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(Failure::input(format!("SHIFTMETRICS_CAPACITY: {e}"))),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    configure_capacity()?;
    let report = commands::dispatch(&cli.command, &cli.common)?;
    let text = match cli.common.format {
        Format::Json => report.json.render(),
        Format::Csv => report.csv,
    };
    match &cli.common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(report.exit)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("shiftmetrics: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
