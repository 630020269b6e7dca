//! `padic-lab`: batch front end for the padic-lab library.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use padic_lab::LabError;
use serde_json::json;

use commands::ConfigKind;
use config::{ExampleKind, ExperimentConfig, Format};

#[derive(Debug, Parser)]
#[command(name = "padic-lab", version, about = "Exact distance, Fourier and extension experiments over Z/p^rZ")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML file of experiment parameters; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Omit the metadata block (timestamp, version) from JSON output.
    #[arg(long, global = true)]
    no_meta: bool,
    /// Worker threads for `verify`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    params: ExperimentConfig,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the points of the sphere F(x) = j.
    Sphere,
    /// Fourier coefficients of a sphere indicator (one frequency with --m, else all).
    Fourier,
    /// Per-stratum maxima and effective constants of a sphere transform.
    Bounds,
    /// A lifted complete exponential sum against its stratum bound.
    Sums,
    /// Orbit and stabilizer of x under the rotation group.
    Orbit,
    /// Largest difference fibre of a circle (--j) or orbit (--x).
    Energy,
    /// L2 to L4 extension ratios on a circle (--j) or orbit (--x).
    Extension,
    /// Exact distance histogram of a point set.
    Census,
    /// Point-sphere incidences against the incidence bound.
    Incidence,
    /// Configuration counts in a point set.
    Configs {
        #[arg(value_enum)]
        kind: ConfigKind,
    },
    /// Mod-p fibre condition and projection densities of a planar set.
    Fiber,
    /// Seeded random-set density sweep.
    Sweep,
    /// Build a sharpness example and measure its distance set.
    Example {
        #[arg(value_enum)]
        kind: ExampleKind,
    },
    /// Run named verifications (`all` runs every id).
    Verify {
        /// Verification ids, or `all`.
        #[arg(required = true)]
        ids: Vec<String>,
    },
}

fn error_kind(e: &anyhow::Error) -> String {
    match e.downcast_ref::<LabError>() {
        Some(lab) => {
            let debug = format!("{lab:?}");
            debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("LabError").to_string()
        }
        None => "InvalidInput".into(),
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let body = json!({"error": {"kind": kind, "message": message}});
    eprintln!("{body}");
    ExitCode::from(code)
}

fn run(cli: Cli) -> anyhow::Result<(String, bool)> {
    let file = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let cfg = cli.params.over(file);
    let out = match &cli.command {
        Command::Sphere => commands::sphere(&cfg),
        Command::Fourier => commands::fourier(&cfg),
        Command::Bounds => commands::bounds(&cfg),
        Command::Sums => commands::sums(&cfg),
        Command::Orbit => commands::orbit_cmd(&cfg),
        Command::Energy => commands::energy(&cfg),
        Command::Extension => commands::extension(&cfg),
        Command::Census => commands::census(&cfg),
        Command::Incidence => commands::incidence(&cfg),
        Command::Configs { kind } => commands::configs(&cfg, *kind),
        Command::Fiber => commands::fiber(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Example { kind } => commands::example_cmd(&cfg, *kind),
        Command::Verify { ids } => commands::verify(&cfg, ids, cli.jobs),
    }?;
    let default_format = match cli.command {
        Command::Sweep => Format::Csv,
        _ => Format::Json,
    };
    let text = out.render(cfg.format.unwrap_or(default_format), !cli.no_meta)?;
    Ok((text, out.passed))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return fail("UsageError", e.render().to_string().trim(), 2);
        }
    };
    match run(cli) {
        Ok((text, passed)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(&error_kind(&e), &format!("{e:#}"), 2),
    }
}
