#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use metric_entropy::oracle::{brute_force_covering, SandwichRow};
use metric_entropy::sweep::{run_sweep, run_verify, SweepConfig};
use metric_entropy::{Exponent, FiniteEllipsoid};
use serde_json::json;

/// Overrides the directory sweep output is written to.
const OUTPUT_DIR_ENV: &str = "METRIC_ENTROPY_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "metric-entropy",
    version,
    about = "Covering-entropy sweeps and oracle checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an entropy sweep described by a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check every oracle fixture in a directory against the bounds.
    Verify {
        #[arg(long)]
        fixtures: PathBuf,
    },
    /// Run the brute-force oracle on one small ellipsoid.
    Oracle {
        /// Ellipsoid as inline JSON or a path to a JSON file.
        #[arg(long)]
        ellipsoid: String,
        #[arg(long)]
        q: Exponent,
        #[arg(long)]
        eps: f64,
        /// Grid pitch; defaults to eps/8.
        #[arg(long)]
        resolution: Option<f64>,
        /// Include the cover centers in the output.
        #[arg(long)]
        centers: bool,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep { config } => sweep(&config),
        Command::Verify { fixtures } => {
            let report = run_verify(&fixtures)
                .with_context(|| format!("verifying fixtures in {}", fixtures.display()))?;
            print!("{}", report.render());
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Oracle {
            ellipsoid,
            q,
            eps,
            resolution,
            centers,
        } => oracle(&ellipsoid, q, eps, resolution, centers),
    }
}

fn sweep(path: &Path) -> Result<ExitCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config = SweepConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?;
    let table = run_sweep(&config)?;
    let rendered = table.render(config.output)?;

    let dir = std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from));
    match dir {
        Some(dir) => {
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let stem = path
                .file_stem()
                .context("config path has no file name")?
                .to_string_lossy();
            let out = dir.join(format!("{stem}.{}", config.output.extension()));
            fs::write(&out, rendered).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("wrote {}", out.display());
        }
        None => print!("{rendered}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle(
    ellipsoid: &str,
    q: Exponent,
    eps: f64,
    resolution: Option<f64>,
    with_centers: bool,
) -> Result<ExitCode> {
    let text = if Path::new(ellipsoid).is_file() {
        fs::read_to_string(ellipsoid)?
    } else {
        ellipsoid.to_string()
    };
    let e: FiniteEllipsoid = serde_json::from_str(&text).context("parsing --ellipsoid")?;
    if !(eps > 0.0) {
        bail!("--eps must be positive");
    }
    let resolution = resolution.unwrap_or(eps / 8.0);
    let mut result = brute_force_covering(&e, q, eps, resolution)?;
    if !with_centers {
        result.centers = None;
    }

    let row = SandwichRow::from_counts(&e, q, eps, result.lower_count, result.upper_count)?;
    let out = json!({
        "ellipsoid": e,
        "q": q,
        "result": result,
        "sandwich": row,
        "sandwich_passed": row.passed(),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(ExitCode::SUCCESS)
}
