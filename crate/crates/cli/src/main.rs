//! Config-driven front end: define a system and potential in a TOML file,
//! run an analysis, and get CSV curves plus a plain-text validity report.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration,
//! 3 enumeration budget exceeded.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "multifractal",
    about = "Pressure functions and multifractal spectra for symbolic and piecewise-conformal dynamics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Cap on the number of cylinders any enumeration may visit.
    #[arg(long, global = true, default_value_t = 1e8)]
    n_max: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analysis described by a config file and write artifacts.
    Analyze {
        config: PathBuf,
        /// Override the output directory from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config file without running anything.
    Validate { config: PathBuf },
    /// Built-in closed-form scenarios.
    Fixtures {
        #[command(subcommand)]
        action: FixturesAction,
    },
}

#[derive(Subcommand)]
enum FixturesAction {
    /// List available fixtures.
    List,
    /// Run one fixture and print one pass/fail line per check.
    Run { name: String },
}

fn init_threads() {
    // MULTIFRACTAL_THREADS pins the rayon pool size (determinism is
    // guaranteed regardless; this is for resource control)
    if let Ok(v) = std::env::var("MULTIFRACTAL_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn load_scenario(path: &PathBuf) -> Result<config::Scenario> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg = config::parse(&text)?;
    config::build(&cfg)
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(run::exit_code_for(&err) as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Analyze { config, out } => {
            let scenario = match load_scenario(config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("invalid config: {e:#}");
                    return Ok(ExitCode::from(2));
                }
            };
            let out_dir = out.clone().unwrap_or_else(|| PathBuf::from(&scenario.out_dir));
            let outcome = run::execute(&scenario, &out_dir, cli.n_max)?;
            for f in outcome.files {
                println!("wrote {}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let text = std::fs::read_to_string(config)
                .with_context(|| format!("reading config {}", config.display()))?;
            let parsed = match config::parse(&text) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("invalid config: {e:#}");
                    return Ok(ExitCode::from(2));
                }
            };
            let scenario = match config::build(&parsed) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("invalid config: {e:#}");
                    return Ok(ExitCode::from(2));
                }
            };
            // surface system/potential diagnostics
            let mut violations = Vec::new();
            match &scenario.system {
                config::BuiltSystem::Sft(s) => violations.extend(s.diagnostics()),
                config::BuiltSystem::Map { map, .. } => violations.extend(map.diagnostics()),
                config::BuiltSystem::Glued(g) => violations.extend(g.diagnostics()),
            }
            if let (config::BuiltSystem::Sft(s), config::BuiltPotential::Single(p)) =
                (&scenario.system, &scenario.potential)
            {
                violations.extend(p.diagnostics(s));
            }
            if violations.is_empty() {
                println!("config ok: {} ({})", scenario.label, scenario.system.describe());
                Ok(ExitCode::SUCCESS)
            } else {
                for v in &violations {
                    eprintln!("invariant violated: {v}");
                }
                Ok(ExitCode::from(2))
            }
        }
        Command::Fixtures { action } => match action {
            FixturesAction::List => {
                for (name, desc) in multifractal::fixtures::NAMES {
                    println!("{name:20} {desc}");
                }
                Ok(ExitCode::SUCCESS)
            }
            FixturesAction::Run { name } => {
                let run = multifractal::fixtures::run(name)?;
                for c in &run.checks {
                    let status = if c.pass { "PASS" } else { "FAIL" };
                    if c.detail.is_empty() {
                        println!("[{status}] {}: {}", run.name, c.label);
                    } else {
                        println!("[{status}] {}: {} ({})", run.name, c.label, c.detail);
                    }
                }
                if run.all_pass() {
                    Ok(ExitCode::SUCCESS)
                } else {
                    Ok(ExitCode::FAILURE)
                }
            }
        },
    }
}
