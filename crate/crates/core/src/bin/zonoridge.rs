use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use zonoridge::experiment::{
    cmd_certify, cmd_lambda_sweep, cmd_loss_range, cmd_oracle_check, cmd_params, ExperimentConfig, OutputFormat,
    Overrides, RunReport,
};
use zonoridge::Error;

#[derive(Parser)]
#[command(
    name = "zonoridge",
    version,
    about = "Certify ridge regression trained on uncertain data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Robustness ratio of test predictions
    Certify(Flags),
    /// Test-loss interval against enumerated worlds
    LossRange(Flags),
    /// Robustness and worst-case loss over a lambda grid
    LambdaSweep(Flags),
    /// Check sampled and enumerated worlds against the abstract model
    OracleCheck(Flags),
    /// Per-coefficient intervals and sign conclusiveness
    Params(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct Flags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    percentage: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Fraction of the label range
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

const USAGE: u8 = 1;
const DATA: u8 = 2;
const SOUNDNESS: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (run, flags): (fn(&ExperimentConfig) -> zonoridge::Result<RunReport>, Flags) = match cli.command {
        Command::Certify(f) => (cmd_certify, f),
        Command::LossRange(f) => (cmd_loss_range, f),
        Command::LambdaSweep(f) => (cmd_lambda_sweep, f),
        Command::OracleCheck(f) => (cmd_oracle_check, f),
        Command::Params(f) => (cmd_params, f),
    };
    let mut cfg = match flags.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(USAGE);
            }
        },
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides {
        seed: flags.seed,
        radius: flags.radius,
        percentage: flags.percentage,
        lambda: flags.lambda,
        threshold: flags.threshold,
    });
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                Error::Config(_) => USAGE,
                _ => DATA,
            });
        }
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let format = match flags.format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    };
    let shown = match flags.out_dir {
        Some(dir) => report.write_to_dir(&dir, format).map(|paths| {
            paths
                .iter()
                .map(|p| format!("wrote {}\n", p.display()))
                .collect::<String>()
        }),
        None => match format {
            OutputFormat::Json => report.to_json().map(|s| s + "\n"),
            OutputFormat::Csv => report.rows.to_csv_string(),
        },
    };
    match shown {
        Ok(s) => print!("{s}"),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(DATA);
        }
    }
    if report.failures > 0 {
        eprintln!("{} containment failures", report.failures);
        return ExitCode::from(SOUNDNESS);
    }
    ExitCode::SUCCESS
}
