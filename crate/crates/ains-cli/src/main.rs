use std::path::PathBuf;
use std::process::ExitCode;

use ains_cli::commands::{all_pass, cmd_degenerate, cmd_mc, cmd_observability, cmd_simulate, SummaryRow};
use ains_cli::config::RunConfig;
use ains_cli::CliError;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ains", about = "Observability analysis and consistency experiments for aided INS")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Null-space dimension over time and analytic null-space residuals.
    Observability {
        #[command(flatten)]
        common: Common,
        /// Rank tolerance; overrides `observability.tol`.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Extra unobservable directions under degenerate motions.
    Degenerate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Monte-Carlo comparison of the standard and ideal filters.
    Mc {
        #[command(flatten)]
        common: Common,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Writes one run of simulated truth, IMU and sensor data.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
}

fn load(c: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.validate()?;
    let out = c.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    Ok((cfg, out))
}

fn tol_or(cfg: &RunConfig, tol: Option<f64>) -> Result<f64, CliError> {
    match tol {
        Some(t) if t.is_nan() || t <= 0.0 => Err(CliError::Config(format!("--tol must be positive, got {t}"))),
        Some(t) => Ok(t),
        None => Ok(cfg.observability.tol),
    }
}

fn run(cli: Cli) -> Result<Vec<SummaryRow>, CliError> {
    match cli.cmd {
        Cmd::Observability { common, tol } => {
            let (cfg, out) = load(&common)?;
            cmd_observability(&cfg, &out, tol_or(&cfg, tol)?)
        }
        Cmd::Degenerate { common, tol } => {
            let (cfg, out) = load(&common)?;
            cmd_degenerate(&cfg, &out, tol_or(&cfg, tol)?)
        }
        Cmd::Mc { common, jobs } => {
            if jobs == Some(0) {
                return Err(CliError::Config("--jobs must be at least 1".into()));
            }
            let (cfg, out) = load(&common)?;
            cmd_mc(&cfg, &out, jobs)
        }
        Cmd::Simulate { common } => {
            let (cfg, out) = load(&common)?;
            cmd_simulate(&cfg, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(rows) => {
            for r in &rows {
                println!("{:<8} {} = {}", if r.pass { "PASS" } else { "FAIL" }, r.case, r.value);
            }
            if all_pass(&rows) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
