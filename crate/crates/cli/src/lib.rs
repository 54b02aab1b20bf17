//! The `sepscope` command line: exact bound tables, Monte Carlo estimates,
//! histogram and curve exports, and the invariant suite.
//!
//! Every document starts with a [`output::RunManifest`] and carries the
//! SHA-256 of its data section, which is identical for any worker count.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod commands;
pub mod output;
pub mod verify;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sepscope::estimator::{MinorSelector, DEFAULT_BINS, DEFAULT_CI_SIGMAS, DEFAULT_REPLICATES, DEFAULT_XIMAX};
use sepscope::sampling::{Engine, SequenceSpec};

pub use output::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) | CliError::Io(_) => EXIT_NUMERIC,
        }
    }
}

impl From<sepscope::Error> for CliError {
    fn from(e: sepscope::Error) -> Self {
        match e {
            sepscope::Error::InvalidArgument(_) | sepscope::Error::InvalidCoords(_) | sepscope::Error::InvalidMatrix(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sepscope", version, about = "Separability probabilities of real two-qubit states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,

    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "SEPSCOPE_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StreamArgs {
    #[arg(long, default_value = "lds", value_parser = parse_engine)]
    pub engine: Engine,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Cube points drawn (before positivity rejection).
    #[arg(long, default_value_t = 1_000_000)]
    pub n: u64,

    /// Scrambled replicates for the low-discrepancy engine.
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    pub replicates: usize,
}

impl StreamArgs {
    pub fn spec(&self) -> SequenceSpec {
        SequenceSpec::state(self.engine, self.seed, true)
    }
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse().map_err(|e: sepscope::Error| e.to_string())
}

fn parse_minor(s: &str) -> Result<MinorSelector, String> {
    s.parse().map_err(|e: sepscope::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EventArg {
    Sep,
    AbsSep,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Exact upper bounds: integral of each closed-form curve against the Jacobian.
    Bounds {
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
    },
    /// Monte Carlo probability of separability or absolute separability.
    Estimate {
        #[command(flatten)]
        stream: StreamArgs,
        #[arg(long, value_enum, default_value = "sep")]
        event: EventArg,
        /// Half-width of the reported interval in standard errors.
        #[arg(long, default_value_t = DEFAULT_CI_SIGMAS)]
        ci_sigmas: f64,
    },
    /// Separability ratio binned in the diagonal log-ratio.
    Histogram {
        #[command(flatten)]
        stream: StreamArgs,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long, default_value_t = DEFAULT_XIMAX)]
        ximax: f64,
        /// Curves to compare the histogram against.
        #[arg(long, value_delimiter = ',')]
        compare: Vec<String>,
    },
    /// Conditional probability that one minor of the partial transpose is non-negative.
    Minor {
        #[command(flatten)]
        stream: StreamArgs,
        /// `pair:I,J` or `delete:K`, 1-based.
        #[arg(long, value_parser = parse_minor)]
        minor: MinorSelector,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,-0.5,0,0.5,1")]
        grid: Vec<f64>,
    },
    /// Curve values on a grid, or residuals against a histogram file.
    Curves {
        /// Curve names; `jacobian` adds the real Jacobian.
        #[arg(long, value_delimiter = ',', default_value = "dom,int,conjecture,previous,jacobian")]
        tags: Vec<String>,
        #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
        xi_min: f64,
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        xi_max: f64,
        #[arg(long, default_value_t = 601)]
        points: usize,
        /// Also tabulate the Jacobian for this Dyson index.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Histogram document (CSV or JSON) to compute residuals against.
        #[arg(long)]
        residual: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        level: verify::Level,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bounds { .. } => "bounds",
            Command::Estimate { .. } => "estimate",
            Command::Histogram { .. } => "histogram",
            Command::Minor { .. } => "minor",
            Command::Curves { .. } => "curves",
            Command::Verify { .. } => "verify",
        }
    }

    fn sequence(&self) -> Option<SequenceSpec> {
        match self {
            Command::Estimate { stream, .. } | Command::Histogram { stream, .. } | Command::Minor { stream, .. } => {
                Some(stream.spec())
            }
            _ => None,
        }
    }
}

/// A rendered document and the process exit code.
#[derive(Debug)]
pub struct Outcome {
    pub document: Option<String>,
    pub message: Option<String>,
    pub exit_code: i32,
}

/// Runs a parsed command line without touching stdout.
pub fn execute(cli: &Cli) -> Outcome {
    let fail = |e: CliError| Outcome {
        document: None,
        message: Some(e.to_string()),
        exit_code: e.exit_code(),
    };
    let start = Instant::now();
    let result = match cli.workers {
        Some(w) => match sepscope::estimator::with_workers(w, || commands::run(&cli.command)) {
            Ok(r) => r,
            Err(e) => return fail(e.into()),
        },
        None => commands::run(&cli.command),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let parameters = serde_json::to_value(&cli.command).expect("arguments serialize");
    let manifest = output::RunManifest::new(cli.command.name(), parameters, cli.command.sequence(), cli.workers);
    let document = output::render(&manifest, &report.tables, cli.format, start.elapsed());
    let exit_code = match report.status {
        commands::Status::Ok => EXIT_OK,
        commands::Status::NumericFailure(_) => EXIT_NUMERIC,
        commands::Status::VerificationFailure(_) => EXIT_VERIFY,
    };
    let message = match report.status {
        commands::Status::Ok => None,
        commands::Status::NumericFailure(m) | commands::Status::VerificationFailure(m) => Some(m),
    };
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, &document) {
            return fail(CliError::Io(format!("cannot write {}: {e}", path.display())));
        }
        return Outcome {
            document: None,
            message,
            exit_code,
        };
    }
    Outcome {
        document: Some(document),
        message,
        exit_code,
    }
}
