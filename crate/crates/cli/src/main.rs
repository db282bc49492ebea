//! `qpjacobi`: Lyapunov exponents, large deviations and avalanche-principle
//! checks for quasi-periodic Jacobi cocycles.
//!
//! Exit codes: 0 success, 2 config/validation, 3 numerical degeneracy,
//! 4 positivity violation, 5 avalanche-principle determinant violation.

use clap::{Parser, Subcommand};
use qpjacobi_cli::commands::{self, Outcome};
use qpjacobi_cli::config::{parse_omega, RunConfig};
use qpjacobi_cli::CliError;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qpjacobi", version, about)]
struct Cli {
    /// Run configuration (flat `key = value` file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides `seed` from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CSV of L_N, its error and the accelerated limit per energy and scale.
    Lyapunov,
    /// Hölder-exponent regression of L over the energy grid (JSON).
    Holder,
    /// Deviation measures per (N, δ) as CSV, plus the fitted rate as JSON
    /// (`<out>.json` next to the CSV, or after it on standard output).
    Ldt {
        /// Replace measured cells by exp(−C δ² N) to test the fitting path.
        #[arg(long, value_name = "C")]
        synthetic_rate: Option<f64>,
    },
    /// Diophantine margin of ω (JSON). Flags override the configuration.
    Diophantine {
        #[arg(long)]
        omega: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        n_max: Option<u64>,
    },
    /// Avalanche-principle verdict for a chain of 2×2 matrices (JSON).
    ApVerify {
        /// One matrix per line, four entries, row-major.
        file: PathBuf,
    },
    /// Statistics of the Birkhoff average F_N (JSON).
    Birkhoff,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::parse(&read(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate().map_err(CliError::Config)?;
    Ok(cfg)
}

#[cfg(feature = "parallel")]
fn set_threads(k: usize) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn set_threads(_k: usize) -> Result<(), CliError> {
    Ok(())
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Config("--threads must be ≥ 1".into()));
        }
        set_threads(k)?;
    }
    let cfg = load_config(cli)?;
    let outcome = match &cli.command {
        Command::Lyapunov => commands::lyapunov(&cfg)?,
        Command::Holder => commands::holder(&cfg)?,
        Command::Ldt { synthetic_rate } => commands::ldt(&cfg, *synthetic_rate)?,
        Command::Diophantine { omega, alpha, n_max } => {
            let omega = match omega {
                Some(s) => parse_omega(s).map_err(CliError::Config)?,
                None => cfg.omega,
            };
            commands::diophantine(omega, alpha.unwrap_or(cfg.alpha), n_max.unwrap_or(cfg.n_max))?
        }
        Command::ApVerify { file } => commands::ap_verify_text(&read(file)?)?,
        Command::Birkhoff => commands::birkhoff(&cfg)?,
    };
    match &cfg.output {
        Some(path) => {
            write(path, &outcome.primary)?;
            if let Some(json) = &outcome.secondary {
                write(&path.with_extension("json"), json)?;
            }
        }
        None => {
            print!("{}", outcome.primary);
            if let Some(json) = &outcome.secondary {
                print!("{json}");
            }
        }
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if let Some(msg) = &outcome.message {
                eprintln!("qpjacobi: {msg}");
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("qpjacobi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
