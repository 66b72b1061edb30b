//! Command-line front end. Writes one JSON report to stdout; diagnostics go
//! to stderr.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 no MLE,
//! 4 capacity exceeded, 5 Newton non-convergence, 6 target not separable,
//! 7 invalid input, 8 failed internal check, 9 cache or I/O error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ergm_exact::cli::{parse_config_table, run, Mode, RunConfig};
use ergm_exact::Error;
use toml::{Table, Value};

#[derive(Parser)]
#[command(
    name = "ergm-exact",
    version,
    about = "Exact ERGM geometry, MLE and degeneracy analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    args: RunArgs,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Realizable set and hull geometry.
    Hull,
    /// Relative-interior membership certificate for the target.
    Check,
    /// Maximum likelihood estimate, or the reason none exists.
    Fit,
    /// Likelihood and mass along the separating ray for a target outside the hull.
    Degeneracy,
    /// Randomized concavity and invariance probes.
    Probe,
    /// Certificate, then fit or degeneracy depending on the verdict.
    All,
}

impl Command {
    fn mode(self) -> Mode {
        match self {
            Command::Hull => Mode::Hull,
            Command::Check => Mode::Check,
            Command::Fit => Mode::Fit,
            Command::Degeneracy => Mode::Degeneracy,
            Command::Probe => Mode::Probe,
            Command::All => Mode::All,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; flags override its entries.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Vertex count.
    #[arg(long, global = true)]
    k: Option<u64>,
    /// Comma-separated statistic kinds, e.g. `edges,triangles`.
    #[arg(long, global = true, value_name = "CSV")]
    stats: Option<String>,
    /// Comma-separated exact target coordinates, e.g. `1/8,3/2,1`.
    #[arg(long, global = true, value_name = "CSV")]
    target: Option<String>,
    /// Cache directory for realizable sets (default: $ERGM_EXACT_CACHE_DIR).
    #[arg(long, global = true, value_name = "PATH")]
    cache: Option<PathBuf>,
    /// Seed for the probe batteries.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated increasing ray scales for degeneracy mode.
    #[arg(long = "r-schedule", global = true, value_name = "CSV")]
    r_schedule: Option<String>,
}

fn csv(text: &str) -> Vec<&str> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn build_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut table = match &cli.args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
                path: "--config".into(),
                message: format!("{}: {e}", path.display()),
            })?;
            toml::from_str::<Table>(&text).map_err(|e| Error::Config {
                path: path.display().to_string(),
                message: e.message().to_string(),
            })?
        }
        None => Table::new(),
    };
    let strings = |text: &str| {
        Value::Array(
            csv(text)
                .into_iter()
                .map(|s| Value::String(s.into()))
                .collect(),
        )
    };
    let a = &cli.args;
    if let Some(k) = a.k {
        table.insert("k".into(), Value::Integer(k.min(i64::MAX as u64) as i64));
    }
    if let Some(stats) = &a.stats {
        table.insert("statistics".into(), strings(stats));
    }
    if let Some(target) = &a.target {
        table.insert("target".into(), strings(target));
    }
    if let Some(cache) = &a.cache {
        table.insert(
            "cache_path".into(),
            Value::String(cache.display().to_string()),
        );
    }
    if let Some(seed) = a.seed {
        table.insert(
            "seed".into(),
            Value::Integer(seed.min(i64::MAX as u64) as i64),
        );
    }
    if let Some(r) = &a.r_schedule {
        let values = csv(r)
            .into_iter()
            .map(|x| {
                x.parse::<f64>()
                    .map(Value::Float)
                    .map_err(|_| Error::Config {
                        path: "r_schedule".into(),
                        message: format!("{x:?} is not a number"),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        table.insert("r_schedule".into(), Value::Array(values));
    }
    table.insert(
        "mode".into(),
        Value::String(cli.command.mode().name().into()),
    );
    parse_config_table(&table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|config| run(&config));
    match result {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = writeln!(out, "{}", report.to_json()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("ergm-exact: {e}");
                    return ExitCode::from(Error::Io(e).exit_code() as u8);
                }
            }
            if let Some(failure) = &report.failure {
                eprintln!("ergm-exact: {}: {}", failure.kind, failure.message);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(err) => {
            eprintln!("ergm-exact: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
