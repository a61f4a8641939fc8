use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hippa_cli::{list_zoo, rates_from_files, run_experiment, verify, CliError, ExperimentConfig, RatesArgs};
use hippa_core::{Property, SamplerConfig};

#[derive(Parser)]
#[command(name = "hippa", version, about = "Run proximal-point experiments on the test-function zoo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file and write traces, reports and a summary.
    Run { config: PathBuf },
    /// List the zoo entries.
    ListZoo,
    /// Sample an entry's certificate.
    Verify {
        entry_id: String,
        /// One of definition, first_order, quadratic_growth, pl,
        /// error_bound_value, error_bound_subgrad. Repeatable.
        #[arg(long = "property", value_parser = parse_property)]
        properties: Vec<Property>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a trace CSV against the bounds implied by a certificate.
    Rates {
        trace: PathBuf,
        #[arg(long)]
        cert: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Minimal objective value, needed for the value checks.
        #[arg(long)]
        min_value: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        inner_tol: f64,
    },
}

fn parse_property(s: &str) -> Result<Property, String> {
    Property::parse(s).ok_or_else(|| format!("unknown property `{s}`"))
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))
}

fn dispatch(cmd: Command) -> Result<ExitCode, CliError> {
    match cmd {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            for p in run_experiment(&cfg)? {
                println!("{}", p.display());
            }
        }
        Command::ListZoo => list_zoo(std::io::stdout().lock())?,
        Command::Verify { entry_id, properties, samples, seed } => {
            let out = verify(&entry_id, &properties, &SamplerConfig::with_samples(samples, seed))?;
            println!("{}", json(&out)?);
        }
        Command::Rates { trace, cert, p, beta, radius, eps, min_value, inner_tol } => {
            let args = RatesArgs { p, beta, radius, eps, min_value, inner_tol };
            let report = rates_from_files(&trace, &cert, &args)?;
            println!("{}", report.to_json());
            if !report.passed() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
