//! `dcrv`: dependent categorical sequences from the command line.
//!
//! Subcommands: `sample`, `pmf`, `moments`, `verify`, `gof`. Exit codes:
//! 0 success, 1 verification failure, 2 input validation, 3 resource cap.
//! Validation failures print a machine-readable `{"error":...,"message":...}`
//! object on standard error.

mod output;
mod verify;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dcrv::canonical::canonical_float;
use dcrv::{distribution, montecarlo, rational, sampler};
use dcrv::{FormulaSource, ModelParams};
use serde::Serialize;
use serde_json::json;

use output::{canonical_json, emit, json_line};

#[derive(Parser)]
#[command(
    name = "dcrv",
    version,
    about = "Dependent categorical sequences: sampling, count tables, moments, and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate sequences by inverse-CDF tree descent
    Sample(SampleArgs),
    /// Count-vector probability, single or full table
    Pmf(PmfArgs),
    /// Mean, covariance, and correlation of the counts
    Moments(MomentsArgs),
    /// Check every closed form against exact enumeration
    Verify(VerifyArgs),
    /// Chi-square goodness of fit of sampled counts
    Gof(GofArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Comma-separated category probabilities, e.g. 0.2,0.3,0.5
    #[arg(long, value_name = "LIST")]
    p: String,
    /// Dependency coefficient in [0, 1]
    #[arg(long, value_name = "DECIMAL")]
    delta: String,
    /// Accept |sum(p) - 1| up to 1e-6 and renormalize
    #[arg(long)]
    renormalize: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of standard output
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Sequence length
    #[arg(long)]
    n: usize,
    /// Number of sequences to generate
    #[arg(long)]
    count: usize,
    /// Seed for the uniform stream
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct PmfArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Sequence length
    #[arg(long)]
    n: usize,
    /// Comma-separated count vector to evaluate
    #[arg(long, value_name = "LIST")]
    counts: Option<String>,
    /// Emit the full composition table instead
    #[arg(long)]
    table: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Sequence length
    #[arg(long)]
    n: usize,
    /// Use the printed formula variants instead of the verified ones
    #[arg(long)]
    printed_formulas: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Largest sequence length to enumerate
    #[arg(long, default_value_t = 5)]
    max_n: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct GofArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Sequence length
    #[arg(long)]
    n: usize,
    /// Number of sequences to draw
    #[arg(long)]
    samples: u64,
    /// Seed for the uniform stream
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

enum Failure {
    Lib(dcrv::Error),
    Usage(String),
    Io(std::io::Error),
}

impl Failure {
    fn code(&self) -> &str {
        match self {
            Failure::Lib(e) => e.code(),
            Failure::Usage(_) => "InvalidArguments",
            Failure::Io(_) => "Io",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_resource_cap() => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Lib(e) => e.fmt(f),
            Failure::Usage(msg) => f.write_str(msg),
            Failure::Io(e) => e.fmt(f),
        }
    }
}

impl From<dcrv::Error> for Failure {
    fn from(e: dcrv::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            let object = json!({
                "error": failure.code(),
                "message": failure.to_string(),
            });
            eprintln!("{}", canonical_json(&object));
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Pmf(args) => cmd_pmf(args),
        Command::Moments(args) => cmd_moments(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Gof(args) => cmd_gof(args),
    }
}

fn build_model(args: &ModelArgs) -> Result<ModelParams, Failure> {
    let probs = args
        .p
        .split(',')
        .map(|tok| rational::from_decimal_str(tok.trim()))
        .collect::<dcrv::Result<Vec<_>>>()?;
    let delta = rational::from_decimal_str(args.delta.trim())?;
    let tolerance = if args.renormalize { 1e-6 } else { 1e-9 };
    Ok(ModelParams::from_rationals_with_tolerance(
        probs, delta, tolerance,
    )?)
}

fn parse_counts(list: &str) -> Result<Vec<usize>, Failure> {
    list.split(',')
        .map(|tok| {
            tok.trim().parse::<usize>().map_err(|_| {
                Failure::Lib(dcrv::Error::InvalidNumber {
                    input: tok.trim().to_string(),
                })
            })
        })
        .collect()
}

fn cmd_sample(args: SampleArgs) -> Result<u8, Failure> {
    let model = build_model(&args.model)?;
    let sequences = sampler::sample_many(&model, args.n, args.count, args.seed)?;
    let mut payload = String::new();
    for seq in &sequences {
        match args.out.format {
            Format::Json => payload.push_str(&json_line(seq)),
            Format::Csv => {
                let row = seq
                    .entries()
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                payload.push_str(&row);
                payload.push('\n');
            }
        }
    }
    emit(&args.out.output, &payload)?;
    Ok(0)
}

#[derive(Serialize)]
struct PmfValue {
    counts: Vec<usize>,
    n: usize,
    probability: f64,
}

#[derive(Serialize)]
struct PmfRow {
    counts: Vec<usize>,
    probability: f64,
}

fn cmd_pmf(args: PmfArgs) -> Result<u8, Failure> {
    let model = build_model(&args.model)?;
    match (&args.counts, args.table) {
        (Some(list), false) => {
            let counts = parse_counts(list)?;
            let probability =
                distribution::pmf(&model, args.n, &dcrv::CountVector::new(counts.clone()))?;
            let payload = match args.out.format {
                Format::Json => json_line(&PmfValue {
                    counts,
                    n: args.n,
                    probability,
                }),
                Format::Csv => format!(
                    "counts,probability\n{},{}\n",
                    join_spaced(&counts),
                    canonical_float(probability)
                ),
            };
            emit(&args.out.output, &payload)?;
            Ok(0)
        }
        (None, true) => {
            let table = distribution::pmf_table(&model, args.n)?;
            let payload = match args.out.format {
                Format::Json => {
                    let rows: Vec<PmfRow> = table
                        .into_iter()
                        .map(|(x, probability)| PmfRow {
                            counts: x.counts().to_vec(),
                            probability,
                        })
                        .collect();
                    json_line(&rows)
                }
                Format::Csv => {
                    let mut csv = String::from("counts,probability\n");
                    for (x, probability) in table {
                        csv.push_str(&format!(
                            "{},{}\n",
                            join_spaced(x.counts()),
                            canonical_float(probability)
                        ));
                    }
                    csv
                }
            };
            emit(&args.out.output, &payload)?;
            Ok(0)
        }
        _ => Err(Failure::Usage(
            "pass exactly one of --counts and --table".into(),
        )),
    }
}

fn join_spaced(counts: &[usize]) -> String {
    counts
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Serialize)]
struct MomentsOutput {
    n: usize,
    #[serde(flatten)]
    summary: dcrv::MomentSummary,
}

fn cmd_moments(args: MomentsArgs) -> Result<u8, Failure> {
    let model = build_model(&args.model)?;
    let source = if args.printed_formulas {
        FormulaSource::Printed
    } else {
        FormulaSource::OracleVerified
    };
    let summary = distribution::moment_summary(&model, args.n, source)?;
    let payload = match args.out.format {
        Format::Json => json_line(&MomentsOutput { n: args.n, summary }),
        Format::Csv => {
            let mut csv = String::from("quantity,row,col,value\n");
            for (i, v) in summary.mean.iter().enumerate() {
                csv.push_str(&format!("mean,{},,{}\n", i + 1, canonical_float(*v)));
            }
            for (name, matrix) in [
                ("covariance", &summary.covariance),
                ("correlation", &summary.correlation),
            ] {
                for (i, row) in matrix.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        csv.push_str(&format!(
                            "{name},{},{},{}\n",
                            i + 1,
                            j + 1,
                            canonical_float(*v)
                        ));
                    }
                }
            }
            csv
        }
    };
    emit(&args.out.output, &payload)?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Failure> {
    let model = build_model(&args.model)?;
    let report = verify::run_verify(&model, args.max_n)?;
    let payload = match args.out.format {
        Format::Json => json_line(&report),
        Format::Csv => {
            let mut csv = String::from("check,n,passed\n");
            for inv in &report.invariants {
                let n = inv.n.map(|n| n.to_string()).unwrap_or_default();
                csv.push_str(&format!("{},{n},{}\n", inv.name, inv.passed));
            }
            for errata in &report.errata {
                for (name, verdict) in [
                    ("pmf", &errata.pmf),
                    ("marginal_proof", &errata.marginal_proof),
                    ("marginal_statement", &errata.marginal_statement),
                    ("mgf", &errata.mgf),
                    (
                        "covariance_oracle_verified",
                        &errata.covariance_oracle_verified,
                    ),
                    ("covariance_printed", &errata.covariance_printed),
                    (
                        "correlation_oracle_verified",
                        &errata.correlation_oracle_verified,
                    ),
                    ("correlation_printed", &errata.correlation_printed),
                    ("cross_covariance", &errata.cross_covariance),
                ] {
                    csv.push_str(&format!(
                        "errata:{name},{},{}\n",
                        errata.n,
                        verdict.verdict != dcrv::Verdict::Deviates
                    ));
                }
            }
            csv
        }
    };
    emit(&args.out.output, &payload)?;
    Ok(if report.all_passed { 0 } else { 1 })
}

fn cmd_gof(args: GofArgs) -> Result<u8, Failure> {
    let model = build_model(&args.model)?;
    let trial = montecarlo::run_count_trial(&model, args.n, args.samples, args.seed)?;
    let payload = match args.out.format {
        Format::Json => json_line(&trial.report),
        Format::Csv => montecarlo::cells_to_csv(&trial.cells),
    };
    emit(&args.out.output, &payload)?;
    Ok(0)
}
