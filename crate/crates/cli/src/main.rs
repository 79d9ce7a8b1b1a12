//! `mildkit`: analyze pro-p presentations from the command line.
//!
//! Exit codes: 0 computed, 1 negative verdict under `--strict`, 2 input
//! error, 3 budget or precision exhausted, 4 internal error.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mildkit::{Budget, ErrorKind, COMMUTATOR_CONVENTION};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "mildkit",
    version,
    about = "Exact checks for mild pro-p presentations"
)]
struct Cli {
    /// Emit a single JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Exit with status 1 when the verdict is negative or inconclusive.
    #[arg(long, global = true)]
    strict: bool,
    /// Matrix-entry budget; overrides MILDKIT_BUDGET.
    #[arg(long, global = true, value_name = "ENTRIES")]
    budget: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct FileArgs {
    /// Presentation file.
    pub file: PathBuf,
    /// Precision of Magnus expansions (default max(8, 2·z)).
    #[arg(long)]
    pub cutoff: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Truncated Magnus expansion of every relator.
    Expand {
        #[command(flatten)]
        input: FileArgs,
        /// Highest τ-degree kept.
        #[arg(long)]
        degree: u32,
        /// Weights, e.g. 2,1 (default: the file's weights).
        #[arg(long, value_delimiter = ',')]
        tau: Option<Vec<u32>>,
    },
    /// Zassenhaus invariant z(G).
    Zassenhaus {
        #[command(flatten)]
        input: FileArgs,
    },
    /// Weighted valuations and initial forms of the relators.
    InitialForms {
        #[command(flatten)]
        input: FileArgs,
        #[arg(long, value_delimiter = ',')]
        tau: Option<Vec<u32>>,
    },
    /// Anick's criterion on the initial forms.
    Anick {
        #[command(flatten)]
        input: FileArgs,
        #[arg(long, value_delimiter = ',')]
        tau: Option<Vec<u32>>,
        /// `deglex`, `deglex:x1<x3<x2<x4` or `u-order:U=x1,x2[;x1<x2<x3]`.
        #[arg(long, default_value = "deglex")]
        order: String,
    },
    /// Quotient dimensions of A/(ρ) against the extremal series.
    Hilbert {
        #[command(flatten)]
        input: FileArgs,
        #[arg(long, value_delimiter = ',')]
        tau: Option<Vec<u32>>,
        /// Highest degree computed (default: the cutoff).
        #[arg(long)]
        degree: Option<u32>,
        /// `recursive` (normal forms) or `slice` (ideal slices).
        #[arg(long, default_value = "recursive")]
        engine: String,
    },
    /// Strong freeness of the initial forms via the Hilbert-series oracle.
    StronglyFree {
        #[command(flatten)]
        input: FileArgs,
        #[arg(long, value_delimiter = ',')]
        tau: Option<Vec<u32>>,
        #[arg(long)]
        degree: Option<u32>,
        /// Also run Anick's criterion under this order.
        #[arg(long)]
        order: Option<String>,
    },
    /// Mildness via the Massey-product criterion.
    Mild {
        #[command(flatten)]
        input: FileArgs,
        /// Search all coordinate splits.
        #[arg(long, conflicts_with = "subset")]
        search: bool,
        /// 1-based coordinates spanning U, e.g. 1,2.
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1)]
        e: u32,
        /// Basis change, rows separated by ';'; columns are the new basis.
        #[arg(long)]
        basis: Option<String>,
    },
    /// Massey tensor, B_n map, shuffle checks and values.
    Massey {
        #[command(flatten)]
        input: FileArgs,
        /// Tensor order (default z(G)).
        #[arg(long)]
        n: Option<u32>,
        /// One vector per slot, e.g. --tuple 1,0,0 --tuple 0,0,1.
        #[arg(long)]
        tuple: Vec<String>,
    },
    /// Demuškin-type test and the resulting mildness verdict.
    Demuskin {
        #[command(flatten)]
        input: FileArgs,
    },
    /// One-relator theorems.
    OneRelator {
        #[command(flatten)]
        input: FileArgs,
        /// Extra weight vectors; repeat for several.
        #[arg(long)]
        tau: Vec<String>,
        /// Include the Demuškin-type test.
        #[arg(long)]
        demuskin: bool,
    },
    /// Hall basis, or the restricted basis with --p.
    Hall {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<u32>>,
    },
    /// Sign check of 1/(1 − Σt^τ + Σt^σ).
    SeriesAdmissible {
        #[arg(long, value_delimiter = ',')]
        tau: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        sigma: Vec<u32>,
        #[arg(long)]
        degree: u32,
    },
}

/// What a command produced, before rendering.
pub struct Report {
    pub inputs: Value,
    pub result: Value,
    pub text: Vec<String>,
    pub verdict: Option<String>,
    /// Negative or inconclusive verdict, for `--strict`.
    pub failed: bool,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Input,
            message: message.into(),
        }
    }
}

impl From<mildkit::Error> for CliError {
    fn from(e: mildkit::Error) -> Self {
        Self {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

macro_rules! via_library_error {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                mildkit::Error::from(e).into()
            }
        })*
    };
}

via_library_error!(
    mildkit::AlgebraError,
    mildkit::BudgetExceeded,
    mildkit::orders::OrderError,
    mildkit::freeness::FreenessError,
    mildkit::magnus::MagnusError,
    mildkit::lie::LieError,
    mildkit::massey::MasseyError,
    mildkit::syntax::SyntaxError
);

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Expand { .. } => "expand",
        Command::Zassenhaus { .. } => "zassenhaus",
        Command::InitialForms { .. } => "initial-forms",
        Command::Anick { .. } => "anick",
        Command::Hilbert { .. } => "hilbert",
        Command::StronglyFree { .. } => "strongly-free",
        Command::Mild { .. } => "mild",
        Command::Massey { .. } => "massey",
        Command::Demuskin { .. } => "demuskin",
        Command::OneRelator { .. } => "one-relator",
        Command::Hall { .. } => "hall",
        Command::SeriesAdmissible { .. } => "series-admissible",
    }
}

fn run(cli: &Cli, budget: &Budget) -> Result<Report, CliError> {
    use commands as c;
    match &cli.command {
        Command::Expand { input, degree, tau } => c::expand(input, *degree, tau.as_deref()),
        Command::Zassenhaus { input } => c::zassenhaus(input),
        Command::InitialForms { input, tau } => c::initial_forms(input, tau.as_deref()),
        Command::Anick { input, tau, order } => c::anick(input, tau.as_deref(), order),
        Command::Hilbert {
            input,
            tau,
            degree,
            engine,
        } => c::hilbert(input, tau.as_deref(), *degree, engine, budget),
        Command::StronglyFree {
            input,
            tau,
            degree,
            order,
        } => c::strongly_free(input, tau.as_deref(), *degree, order.as_deref(), budget),
        Command::Mild {
            input,
            search,
            subset,
            e,
            basis,
        } => c::mild(
            input,
            *search,
            subset.as_deref(),
            *e,
            basis.as_deref(),
            budget,
        ),
        Command::Massey { input, n, tuple } => c::massey(input, *n, tuple, budget),
        Command::Demuskin { input } => c::demuskin(input, budget),
        Command::OneRelator {
            input,
            tau,
            demuskin,
        } => c::one_relator(input, tau, *demuskin, budget),
        Command::Hall { d, n, p, weights } => c::hall(*d, *n, *p, weights.as_deref(), budget),
        Command::SeriesAdmissible { tau, sigma, degree } => {
            c::series_admissible(tau, sigma, *degree)
        }
    }
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Input => 2,
        ErrorKind::Resource => 3,
        ErrorKind::Internal => 4,
    }
}

fn kind_name(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Input => "input",
        ErrorKind::Resource => "resource",
        ErrorKind::Internal => "internal",
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut budget = Budget::from_env();
    if let Some(b) = cli.budget {
        budget = budget.with_matrix_entries(b);
    }
    let name = command_name(&cli.command);
    let start = Instant::now();
    let outcome = run(&cli, &budget);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;

    match outcome {
        Ok(report) => {
            if cli.json {
                let doc = json!({
                    "command": name,
                    "convention": COMMUTATOR_CONVENTION,
                    "inputs": report.inputs,
                    "verdict": report.verdict,
                    "result": report.result,
                    "timing_ms": elapsed_ms,
                });
                emit(&serde_json::to_string_pretty(&doc).expect("serializable"));
            } else {
                let mut out = report.text.join("\n");
                if let Some(v) = &report.verdict {
                    out.push_str(&format!("\nverdict: {v}"));
                }
                out.push_str(&format!("\ntime: {elapsed_ms:.1} ms"));
                emit(out.trim_start());
            }
            if cli.strict && report.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            if cli.json {
                let doc = json!({
                    "command": name,
                    "convention": COMMUTATOR_CONVENTION,
                    "error": { "kind": kind_name(err.kind), "message": err.message },
                    "timing_ms": elapsed_ms,
                });
                emit(&serde_json::to_string_pretty(&doc).expect("serializable"));
            } else {
                eprintln!("error ({}): {}", kind_name(err.kind), err.message);
            }
            ExitCode::from(exit_code(err.kind))
        }
    }
}
