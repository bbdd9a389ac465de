//! `segguard` command line.
//!
//! Every command produces a [`Report`]: the rendered text plus an exit code.
//! Exit codes are stable and meant for scripting:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | input could not be read or failed validation |
//! | 3 | `classify`: the database is not worst-case optimal |
//! | 4 | `witness`: the requested construction does not apply |
//! | 5 | an in-process cross-check failed |
//! | 6 | the oracle's price-profile enumeration exceeds its limit |
//!
//! Grid positions and labels are one-based on the command line and in all
//! output.

#![allow(clippy::result_large_err)]

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use segguard_core::{Database, Error, Market, OracleConfig, Rational};

mod commands;
mod render;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_NOT_WC: u8 = 3;
pub const EXIT_CONSTRUCTOR: u8 = 4;
pub const EXIT_MISMATCH: u8 = 5;
pub const EXIT_GUARD: u8 = 6;

/// Environment variable overriding the oracle's profile limit.
pub const MAX_PROFILES_ENV: &str = "SEGGUARD_MAX_PROFILES";

#[derive(Debug, Parser)]
#[command(
    name = "segguard",
    version,
    about = "Robust analysis of consumer-data regulation under price discrimination"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format; `sweep` and `triangle` default to csv, the rest to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// Consumer surplus strictly below uniform pricing.
    Reduce,
    /// Consumer and producer surplus strictly above uniform pricing.
    Improve,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Uniform monopoly price, surpluses and the robust thresholds.
    Analyze {
        #[arg(long)]
        market: PathBuf,
    },
    /// Greedy decomposition into extreme markets.
    Segment {
        #[arg(long)]
        market: PathBuf,
    },
    /// Worst-case optimality and undominance of a database.
    Classify {
        #[arg(long)]
        market: PathBuf,
        #[arg(long)]
        database: PathBuf,
        /// Weight on consumer surplus, in [1/2, 1].
        #[arg(long)]
        alpha: Option<Rational>,
    },
    /// Build an adversarial segmentation for one label.
    Witness {
        #[arg(long)]
        market: PathBuf,
        #[arg(long)]
        database: PathBuf,
        #[arg(long, value_enum)]
        direction: Direction,
        /// One-based label.
        #[arg(long)]
        label: usize,
        /// Mass kept at or above the uniform price when the low valuations
        /// fill the label (improve only).
        #[arg(long)]
        epsilon: Option<Rational>,
    },
    /// Cross-check the classification against the brute-force LP oracle.
    Verify {
        #[arg(long)]
        market: PathBuf,
        #[arg(long)]
        database: PathBuf,
        #[arg(long)]
        alpha: Option<Rational>,
    },
    /// Lower threshold along the family (2/5, 3/5 - x3, x3), x3 in (0, 1/10].
    Sweep {
        #[arg(long, default_value_t = 10)]
        x3_steps: u32,
    },
    /// Sampled (producer, consumer) surplus pairs over feasible segmentations.
    Triangle {
        #[arg(long)]
        market: PathBuf,
        #[arg(long)]
        database: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Rendered output and the exit code to finish with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub text: String,
    pub code: u8,
    /// Extra line for stderr.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::EnumerationTooLarge { .. } => EXIT_GUARD,
            _ => EXIT_VALIDATION,
        };
        CliError::new(code, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> CliResult<Report> {
    commands::dispatch(cli)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::new(
            EXIT_VALIDATION,
            format!("cannot read {what} {}: {e}", path.display()),
        )
    })?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::new(
            EXIT_VALIDATION,
            format!("invalid {what} {}: {e}", path.display()),
        )
    })
}

pub fn load_market(path: &Path) -> CliResult<Market> {
    read_json(path, "market")
}

pub fn load_database(path: &Path) -> CliResult<Database> {
    read_json(path, "database")
}

/// Oracle limits, honouring [`MAX_PROFILES_ENV`].
pub fn oracle_config() -> CliResult<OracleConfig> {
    let mut cfg = OracleConfig::default();
    if let Ok(raw) = std::env::var(MAX_PROFILES_ENV) {
        cfg.max_profiles = raw.trim().parse().map_err(|_| {
            CliError::new(
                EXIT_VALIDATION,
                format!("{MAX_PROFILES_ENV} must be a non-negative integer, got {raw:?}"),
            )
        })?;
    }
    Ok(cfg)
}
