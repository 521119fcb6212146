//! Command line front end for the `ksmooth` engine.
//!
//! The binary exposes three subcommands: `density` and `regress` run the
//! full smoothing pipeline on a CSV sample and write the estimates as CSV,
//! and `bench` times the fast engine against the naive oracle on a synthetic
//! Gaussian protocol and reports accuracy statistics.
//!
//! This library target exists so integration tests can drive the same
//! pipeline and benchmark code in process; the binary in `main.rs` is a thin
//! argument-parsing wrapper around [`commands`].

pub mod bench;
pub mod commands;
pub mod config;
pub mod io;
pub mod pipeline;
pub mod rng;

use std::path::PathBuf;

/// Everything that can go wrong in a CLI run, split by exit code.
///
/// I/O and input-parsing failures exit with code 1; configuration and
/// pipeline precondition violations exit with code 2 (matching the code
/// `clap` itself uses for usage errors).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Reading or writing a file failed.
    #[error("{path}: {source}")]
    Io {
        /// The file involved.
        path: PathBuf,
        /// The underlying error.
        source: std::io::Error,
    },

    /// A CSV input file is malformed.
    #[error("{path}:{line}: {message}")]
    Parse {
        /// The file involved.
        path: PathBuf,
        /// 1-based line number of the offending row.
        line: usize,
        /// What was wrong with it.
        message: String,
    },

    /// An option value violates a documented precondition.
    #[error("{0}")]
    Config(String),

    /// The engine rejected its inputs; the message names the module whose
    /// precondition failed.
    #[error("precondition violated in {}: {source}", module_of(.source))]
    Engine {
        /// The engine error.
        #[from]
        source: ksmooth::Error,
    },
}

impl CliError {
    /// Process exit code for this error: 1 for I/O and parse failures, 2 for
    /// configuration and engine precondition violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } => 1,
            CliError::Config(_) | CliError::Engine { .. } => 2,
        }
    }
}

/// Names the module whose precondition an engine error reports.
fn module_of(err: &ksmooth::Error) -> &'static str {
    match err {
        ksmooth::Error::MonotonicityViolation { .. } => "sliding1d",
        ksmooth::Error::NonPositiveBandwidth { .. } => "bandwidth",
        ksmooth::Error::UnsupportedFastKernel(_) => "kernels",
        ksmooth::Error::ConstantBandwidthRequired(_) => "sliding1d",
        ksmooth::Error::InvalidK { .. } => "bandwidth",
        ksmooth::Error::InfeasibleFraction { .. } => "bandwidth",
        ksmooth::Error::DegenerateSample(_) => "frame",
        ksmooth::Error::ThresholdCollision { .. } => "partition",
        ksmooth::Error::DimensionMismatch { .. } => "frame",
        ksmooth::Error::AverageFormNeedsFiniteSupport(_) => "oracle",
    }
}

/// Convenience alias used throughout the CLI modules.
pub type CliResult<T> = std::result::Result<T, CliError>;
