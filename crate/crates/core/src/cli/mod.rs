//! Batch front end: `run`, `validate` and `list-fixtures`.

pub mod config;
pub mod fixtures;
pub mod runner;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::par::Strategy;
use config::{ConfigError, RunConfig};
use runner::Overrides;

pub const EXIT_OK: u8 = 0;
pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_INVALID: u8 = 2;

const DEFAULT_OUT: &str = "uolab-out";

#[derive(Debug, Parser)]
#[command(name = "uolab", version, about = "Experiments on uo convergence and martingales in finite vector lattices")]
struct Cli {
    /// Print the fixture gallery and exit.
    #[arg(long)]
    list_fixtures: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured experiments and write reports.
    Run(RunArgs),
    /// Check a configuration without running it.
    Validate(SourceArgs),
    /// Print the fixture gallery.
    ListFixtures,
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// Configuration file (JSON).
    #[arg(long, required_unless_present = "fixture", conflicts_with = "fixture")]
    config: Option<PathBuf>,
    /// Run a single gallery fixture instead of a configuration file.
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comparison tolerance for floating-point identities (≥ 0).
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Output directory; defaults to the config's `out` or `uolab-out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(args: &SourceArgs) -> Result<RunConfig, ConfigError> {
    let text = match (&args.config, &args.fixture) {
        (Some(path), _) => std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?,
        (None, Some(name)) => {
            fixtures::load(name)?;
            format!(r#"{{"experiments": [{{"name": {name:?}, "process": {{"fixture": {name:?}}}}}]}}"#)
        }
        (None, None) => return Err(ConfigError::new("", "either --config or --fixture is required")),
    };
    config::parse(&text)
}

fn overrides(args: &SourceArgs) -> Result<Overrides, ConfigError> {
    if let Some(t) = args.tolerance {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(ConfigError::new("--tolerance", format!("{t} must be finite and nonnegative")));
        }
    }
    Ok(Overrides { seed: args.seed, tolerance: args.tolerance, horizon: args.horizon })
}

fn list_fixtures() {
    for name in fixtures::names() {
        let f = fixtures::load(name).expect("shipped fixtures parse");
        println!("{name}\tv{}\t{}", f.version, f.description);
    }
}

fn invalid(e: impl std::fmt::Display) -> u8 {
    eprintln!("error: {e}");
    EXIT_INVALID
}

/// Runs the command line and returns the process exit status.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    if cli.list_fixtures {
        list_fixtures();
        return EXIT_OK;
    }
    match cli.command {
        None => invalid("no command given; try `uolab --help`"),
        Some(Command::ListFixtures) => {
            list_fixtures();
            EXIT_OK
        }
        Some(Command::Validate(args)) => {
            match load_config(&args).and_then(|c| runner::resolve(c, overrides(&args)?)) {
                Ok(plan) => {
                    println!("ok: {} experiments", plan.jobs.len());
                    EXIT_OK
                }
                Err(e) => invalid(e),
            }
        }
        Some(Command::Run(args)) => run(&args),
    }
}

fn run(args: &RunArgs) -> u8 {
    let plan = match load_config(&args.source).and_then(|c| runner::resolve(c, overrides(&args.source)?)) {
        Ok(p) => p,
        Err(e) => return invalid(e),
    };
    let out = args.out.clone().or_else(|| plan.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let outcome = match runner::execute(&plan, Strategy::default()) {
        Ok(o) => o,
        Err(e) => return invalid(e),
    };
    if let Err(e) = runner::write_artifacts(&out, &outcome.reports) {
        return invalid(format!("writing {}: {e}", out.display()));
    }
    for (job, report) in plan.jobs.iter().zip(&outcome.reports) {
        let passed = report.verdicts.values().filter(|v| v.value).count();
        println!(
            "{}: {passed}/{} verdicts true, {} expectations",
            report.name,
            report.verdicts.len(),
            job.expect.len()
        );
    }
    if outcome.mismatches.is_empty() {
        println!("reports written to {}", out.display());
        EXIT_OK
    } else {
        for m in &outcome.mismatches {
            eprintln!("mismatch: {m}");
        }
        EXIT_MISMATCH
    }
}
