//! `kds-lab`: scenario runner for the Kerr-de Sitter numerical laboratory.
//!
//! Usage: `kds-lab <subcommand> --config <path> --out <dir> [--threads N]
//! [--seed S]`. On failure a machine-readable error JSON goes to stdout
//! and the exit status is nonzero.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use kds_core::error::KdsError;

const USAGE: &str = "kds-lab <subcommand> --config <path> --out <dir> [--threads N] [--seed S]

subcommands:
  horizons              locate horizon radii and extension caps
  verify-geometry       identity sweeps against the threshold table
  chart-report          chart profile and per-node geometry CSV
  geometry-report       alias of chart-report
  evolve-scalar         scalar wave run with energy series and snapshots
  evolve-tensor         linearized tensor run (a = 0, m = 0)
  evolve-nonlinear      gauge-fixed nonlinear run with constraint monitor
  project-initial-data  slice gauge projection of configured data
  divergence-check      divergence-identity balance of a scalar run
  decay-fit             exponential fit of an energy CSV
  interp-check          interpolation inequality on the spectral toy
  convergence           three-resolution self-convergence order
  gauge-check           constraint, projection, and quadraticity summary";

fn error_code(e: &KdsError) -> &'static str {
    match e {
        KdsError::InvalidParams(_) => "InvalidParams",
        KdsError::SubextremalityViolated { .. } => "SubextremalityViolated",
        KdsError::SpinTooLarge { .. } => "SpinTooLarge",
        KdsError::RootFindingFailed(_) => "RootFindingFailed",
        KdsError::ChartDomainViolation(_) => "ChartDomainViolation",
        KdsError::SpacelikenessLost { .. } => "SpacelikenessLost",
        KdsError::TimelikenessLost { .. } => "TimelikenessLost",
        KdsError::StencilOutOfDomain(_) => "StencilOutOfDomain",
        KdsError::EpsilonUnderflow { .. } => "EpsilonUnderflow",
        KdsError::DegenerateLapse { .. } => "DegenerateLapse",
        KdsError::GridTooCoarse(_) => "GridTooCoarse",
        KdsError::UnsupportedBackground(_) => "UnsupportedBackground",
        KdsError::NonFiniteState { .. } => "NonFiniteState",
        KdsError::SignatureLost { .. } => "SignatureLost",
        KdsError::NonPositiveEnergy => "NonPositiveEnergy",
        KdsError::WindowTooShort { .. } => "WindowTooShort",
        KdsError::RegularityBudgetExceeded { .. } => "RegularityBudgetExceeded",
        KdsError::Io(_) => "Io",
        KdsError::Config(_) => "Config",
    }
}

fn fail(e: &KdsError) -> ExitCode {
    let payload = serde_json::json!({
        "error": {
            "code": error_code(e),
            "message": e.to_string(),
        }
    });
    println!("{}", serde_json::to_string_pretty(&payload).unwrap());
    ExitCode::FAILURE
}

struct Args {
    command: String,
    config: PathBuf,
    out: PathBuf,
    threads: Option<usize>,
    seed: Option<u64>,
}

fn parse_args() -> Result<Args, String> {
    let mut argv = std::env::args().skip(1);
    let command = argv.next().ok_or_else(|| USAGE.to_string())?;
    if command == "--help" || command == "-h" || command == "help" {
        return Err(USAGE.to_string());
    }
    let mut config = None;
    let mut out = None;
    let mut threads = None;
    let mut seed = None;
    while let Some(flag) = argv.next() {
        let mut value = || {
            argv.next()
                .ok_or_else(|| format!("flag {flag} needs a value"))
        };
        match flag.as_str() {
            "--config" => config = Some(PathBuf::from(value()?)),
            "--out" => out = Some(PathBuf::from(value()?)),
            "--threads" => {
                threads = Some(
                    value()?
                        .parse::<usize>()
                        .map_err(|e| format!("--threads: {e}"))?,
                )
            }
            "--seed" => {
                seed = Some(
                    value()?
                        .parse::<u64>()
                        .map_err(|e| format!("--seed: {e}"))?,
                )
            }
            other => return Err(format!("unknown flag {other}\n\n{USAGE}")),
        }
    }
    Ok(Args {
        command,
        config: config.ok_or("missing --config <path>")?,
        out: out.ok_or("missing --out <dir>")?,
        threads,
        seed,
    })
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) {
    let n = threads.or_else(|| {
        std::env::var("KDS_LAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        // Ignore failure: the pool can only be initialized once.
        let _ = rayon_pool(n);
    }
}

#[cfg(feature = "parallel")]
fn rayon_pool(n: usize) -> Result<(), String> {
    kds_core::par::build_global_pool(n).map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_threads: Option<usize>) {}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::FAILURE;
        }
    };
    configure_threads(args.threads);
    let mut config = match config::parse_config(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        return fail(&KdsError::Io(e.to_string()));
    }
    let ctx = commands::RunContext {
        command: args.command,
        config,
        out_dir: args.out,
    };
    match commands::run(&ctx) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
