use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use grauert_core::cli::{self, ProbeModel, ReportEnvelope};
use grauert_core::Error;

#[derive(Parser)]
#[command(name = "grauert", version, about = "Verification suites for the Grauert tube of CP^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Write the report to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Cpn,
    Sphere,
    Block,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustion, potential, leaf, HCMA, harmonicity and inverse checks.
    VerifyModel {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = cli::DEFAULT_SEED)]
        seed: u64,
        /// Sample count per check.
        #[arg(long, default_value_t = cli::DEFAULT_GRID)]
        grid: usize,
        /// Override every check tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Integral cohomology of UM, D and X.
    Cohomology {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Restricted degrees on a compactified leaf and Morse-index counts.
    Degrees {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = cli::DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Radius of the tube on which Im Psi stays positive definite.
    TubeProbe {
        #[arg(long, value_enum)]
        model: ModelKind,
        /// Dimension parameter for cpn and sphere.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Curvature of the block model.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        k: f64,
        #[arg(long, default_value_t = 40.0)]
        tau_max: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Anti-holomorphic involutions of CP^n.
    Involution {
        #[command(subcommand)]
        action: InvolutionAction,
    },
}

#[derive(Subcommand)]
enum InvolutionAction {
    /// Classify [Z] -> [conj(A Z)] for a matrix given as rows of [re, im] pairs.
    Classify {
        #[arg(long, value_name = "FILE")]
        matrix: PathBuf,
        #[arg(long, default_value_t = cli::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = cli::FIXED_POINT_TRIALS)]
        trials: usize,
        #[command(flatten)]
        output: Output,
    },
}

fn emit(text: &str, output: &Output) -> Result<(), String> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(report: &ReportEnvelope, output: &Output) -> Result<i32, String> {
    let text = match output.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    emit(&text, output)?;
    Ok(report.exit_code())
}

fn usage_or_failure(e: Error) -> (i32, String) {
    match e {
        Error::InvalidParameter(_) | Error::OutOfRange { .. } | Error::DimensionMismatch { .. } => (2, e.to_string()),
        other => (1, other.to_string()),
    }
}

fn run(command: Command) -> Result<i32, (i32, String)> {
    let io = |e: String| (2, e);
    match command {
        Command::VerifyModel { n, seed, grid, tol, output } => {
            let report = cli::cmd_verify_model(n, grid, tol, seed).map_err(usage_or_failure)?;
            render(&report, &output).map_err(io)
        }
        Command::Cohomology { n, output } => {
            let report = cli::cmd_cohomology(n).map_err(usage_or_failure)?;
            let code = if report.mismatches == 0 { 0 } else { 1 };
            let text = match output.format {
                Format::Csv => report.to_csv(),
                Format::Json => report.envelope().to_json() + "\n",
            };
            emit(&text, &output).map_err(io)?;
            Ok(code)
        }
        Command::Degrees { n, seed, output } => {
            let report = cli::cmd_degrees(n, seed).map_err(usage_or_failure)?;
            render(&report, &output).map_err(io)
        }
        Command::TubeProbe { model, n, k, tau_max, output } => {
            let model = match model {
                ModelKind::Cpn => ProbeModel::Cpn(n),
                ModelKind::Sphere => ProbeModel::Sphere(n),
                ModelKind::Block => ProbeModel::Block(k),
            };
            let report = cli::cmd_tube_probe(model, tau_max).map_err(usage_or_failure)?;
            render(&report, &output).map_err(io)
        }
        Command::Involution { action: InvolutionAction::Classify { matrix, seed, trials, output } } => {
            let text = std::fs::read_to_string(&matrix).map_err(|e| (2, format!("cannot read {}: {e}", matrix.display())))?;
            let a = cli::parse_matrix_json(&text).map_err(usage_or_failure)?;
            let report = cli::cmd_involution_classify(a, trials, seed).map_err(usage_or_failure)?;
            render(&report, &output).map_err(io)
        }
    }
}

fn main() -> ExitCode {
    let parsed = Cli::parse();
    match run(parsed.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code as u8)
        }
    }
}
