//! Command-line front end.
//!
//! Exit codes: 0 success, 1 violations found (`check` only), 2 input or
//! compile error, 3 a corrected batch still violated a requirement.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::batch::{read_batch, write_batch, BatchError};
use crate::lang::{normalize, parse_requirements};
use crate::linear::{LinearConfig, DEFAULT_FM_CAP, DEFAULT_STRICT_EPSILON};
use crate::report::{check_batch, correct_batch, write_report, ReportError};
use crate::shield::{EngineOverride, Shield, ShieldConfig, ShieldError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_GUARANTEE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "reqshield", version, about = "Correct model outputs so they satisfy declared requirements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and compile a requirements file, then print the plan summary.
    Compile {
        #[command(flatten)]
        shield: ShieldArgs,
    },
    /// Correct a CSV batch of predictions.
    Apply {
        #[command(flatten)]
        shield: ShieldArgs,
        #[arg(short = 'i', long, env = "SHIELD_INPUT")]
        input: PathBuf,
        #[arg(short = 'o', long, env = "SHIELD_OUTPUT")]
        output: PathBuf,
        /// Write a JSON compliance report.
        #[arg(long, env = "SHIELD_REPORT")]
        report: Option<PathBuf>,
    },
    /// Count requirement violations in a CSV batch without correcting it.
    Check {
        #[command(flatten)]
        shield: ShieldArgs,
        #[arg(short = 'i', long, env = "SHIELD_INPUT")]
        input: PathBuf,
        #[arg(long, env = "SHIELD_REPORT")]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ShieldArgs {
    /// Requirements file (CNF clauses or linear inequalities, one per line).
    #[arg(short = 'r', long, env = "SHIELD_REQUIREMENTS")]
    pub requirements: PathBuf,
    /// Number of output variables; inferred from the input width (or, for
    /// `compile`, the highest referenced variable) when omitted.
    #[arg(short = 'n', long, env = "SHIELD_NUM_VARIABLES")]
    pub num_variables: Option<usize>,
    #[arg(long, value_enum, default_value_t = EngineOverride::Auto, env = "SHIELD_ENGINE")]
    pub engine: EngineOverride,
    /// Linear processing order as comma-separated variable indices.
    #[arg(long, value_delimiter = ',', env = "SHIELD_ORDERING")]
    pub ordering: Option<Vec<usize>>,
    /// Margin used to turn strict inequalities into non-strict ones.
    #[arg(long, default_value_t = DEFAULT_STRICT_EPSILON, env = "SHIELD_STRICT_EPSILON")]
    pub strict_epsilon: f64,
    /// Absolute tolerance when checking linear requirements.
    #[arg(long, default_value_t = 1e-9, env = "SHIELD_TOLERANCE")]
    pub tolerance: f64,
    /// Cap on Fourier-Motzkin derived constraints.
    #[arg(long = "fm-cap", default_value_t = DEFAULT_FM_CAP, env = "SHIELD_FM_CAP")]
    pub fm_cap: usize,
}

impl ShieldArgs {
    fn config(&self) -> ShieldConfig {
        ShieldConfig {
            engine: self.engine,
            linear: LinearConfig {
                ordering: self.ordering.clone(),
                strict_epsilon: self.strict_epsilon,
                fm_cap: self.fm_cap,
            },
            tolerance: self.tolerance,
        }
    }

    fn read_requirements(&self) -> Result<String, Failure> {
        std::fs::read_to_string(&self.requirements).map_err(|e| {
            Failure::input(format!("cannot read {}: {e}", self.requirements.display()))
        })
    }

    fn build(&self, num_variables: usize) -> Result<Shield, Failure> {
        let text = self.read_requirements()?;
        Ok(Shield::from_text(&text, num_variables, &self.config())?)
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: String) -> Self {
        Failure { code: EXIT_ERROR, message }
    }
}

impl From<ShieldError> for Failure {
    fn from(e: ShieldError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<BatchError> for Failure {
    fn from(e: BatchError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        let code = match e {
            ReportError::GuaranteeViolated { .. } => EXIT_GUARANTEE,
            _ => EXIT_ERROR,
        };
        Failure { code, message: e.to_string() }
    }
}

fn read_input(path: &Path, num_variables: Option<usize>) -> Result<crate::batch::PredictionBatch, Failure> {
    read_batch(path, num_variables).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: &Command, out: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| Failure::input(format!("cannot write output: {e}"));
    match command {
        Command::Compile { shield } => {
            let shield = match shield.num_variables {
                Some(n) => shield.build(n)?,
                None => {
                    let text = shield.read_requirements()?;
                    let mut rs = parse_requirements(&text, usize::MAX).map_err(ShieldError::from)?;
                    rs.num_variables = rs.referenced_variables();
                    let rs = normalize(&rs).map_err(ShieldError::from)?;
                    Shield::compile(&rs, &shield.config())?
                }
            };
            for w in &shield.requirements().warnings {
                writeln!(out, "warning: {w}").map_err(io)?;
            }
            write!(out, "{}", shield.summary()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Apply { shield: args, input, output, report } => {
            let batch = read_input(input, args.num_variables)?;
            let shield = args.build(args.num_variables.unwrap_or(batch.width()))?;
            let (corrected, rep) = correct_batch(&shield, &batch)?;
            write_batch(&corrected, output)?;
            if let Some(path) = report {
                write_report(&rep, path)?;
            }
            writeln!(
                out,
                "corrected {} of {} rows ({} engine); output written to {}",
                rep.totals.rows_corrected,
                rep.totals.rows,
                shield.engine(),
                output.display()
            )
            .map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Check { shield: args, input, report } => {
            let batch = read_input(input, args.num_variables)?;
            let shield = args.build(args.num_variables.unwrap_or(batch.width()))?;
            let rep = check_batch(&shield, &batch)?;
            if let Some(path) = report {
                write_report(&rep, path)?;
            }
            let mut total = 0;
            for r in &rep.requirements {
                total += r.violations_before;
                writeln!(out, "{}\tline {}\t{}\t{}", r.index, r.line, r.violations_before, r.requirement)
                    .map_err(io)?;
            }
            writeln!(out, "{total} violations in {} rows", rep.totals.rows).map_err(io)?;
            Ok(if total == 0 { EXIT_OK } else { EXIT_VIOLATIONS })
        }
    }
}
