//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::allocator::SearchConfig;
use crate::error::{exit, Error};
use crate::ingest::{load_platform, load_rates, load_requests, rates_to_json, synth_rates};
use crate::oracle::{oracle_report, DEFAULT_ENUMERATION_CAP};
use crate::report::{run, OracleDocument, RunOptions};

#[derive(Debug, Parser)]
#[command(name = "qaiccc", version, about = "Crosstalk-aware qubit allocation for shared quantum platforms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Allocate qubits and print the run report.
    Allocate(AllocateArgs),
    /// Compare the allocator with exhaustive enumeration (small platforms only).
    Oracle(OracleArgs),
    /// Write a synthetic rates file for a platform.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Platform JSON: qubit count and coupling edges
    #[arg(long, value_name = "FILE")]
    pub platform: PathBuf,
    /// Crosstalk rates JSON
    #[arg(long, value_name = "FILE")]
    pub rates: PathBuf,
    /// Requested user sizes JSON
    #[arg(long, value_name = "FILE")]
    pub requests: PathBuf,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Keep at most N population members per step.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub max_population: Option<u64>,
    /// Connector sets tried per connection.
    #[arg(long, value_name = "N", default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_paths: u64,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            max_population: self.max_population.map(|n| n as usize),
            max_paths_per_connect: self.max_paths as usize,
            ..SearchConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct AllocateArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Write the report here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Leave stage timings out of the report.
    #[arg(long)]
    pub no_timings: bool,
    /// Include the population after every rate.
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Largest platform to enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: usize,
    /// Write the report here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Platform JSON: qubit count and coupling edges
    #[arg(long, value_name = "FILE")]
    pub platform: PathBuf,
    /// Seed for the rate generator
    #[arg(long)]
    pub seed: u64,
    /// Keep a seeded random subset of N rates
    #[arg(long, value_name = "N")]
    pub max_rates: Option<usize>,
    /// Write the rates here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

/// Initializes logging from `QAICCC_LOG` (default `warn`).
pub fn init_logging() {
    let env = env_logger::Env::new().filter_or("QAICCC_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

fn emit(text: &str, output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Error> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn allocate_cmd(args: &AllocateArgs, stdout: &mut dyn Write) -> Result<(), Error> {
    let g = load_platform(&args.inputs.platform)?;
    let sizes = load_requests(&args.inputs.requests)?;
    let rates = load_rates(&args.inputs.rates, &g)?;
    let opts = RunOptions {
        snapshots: args.verbose,
        timings: !args.no_timings,
    };
    let report = run(&g, &sizes, &rates, &args.search.config(), opts)?;
    let text = match args.format {
        Format::Json => to_json(&report),
        Format::Text => report.to_text(),
    };
    emit(&text, args.output.as_deref(), stdout)
}

fn oracle_cmd(args: &OracleArgs, stdout: &mut dyn Write) -> Result<(), Error> {
    let g = load_platform(&args.inputs.platform)?;
    let sizes = load_requests(&args.inputs.requests)?;
    let rates = load_rates(&args.inputs.rates, &g)?;
    let doc = OracleDocument::new(oracle_report(&g, &sizes, &rates, &args.search.config(), args.cap)?);
    let text = match args.format {
        Format::Json => to_json(&doc),
        Format::Text => doc.to_text(),
    };
    emit(&text, args.output.as_deref(), stdout)
}

fn synth_cmd(args: &SynthArgs, stdout: &mut dyn Write) -> Result<(), Error> {
    let g = load_platform(&args.platform)?;
    let rates = synth_rates(&g, args.seed, args.max_rates);
    emit(&rates_to_json(&rates), args.output.as_deref(), stdout)
}

/// Parses `argv` and runs one command. Returns the process exit code.
pub fn main_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = write!(stderr, "{e}");
            return exit::INPUT;
        }
        Err(e) => {
            let _ = write!(stdout, "{e}");
            return exit::OK;
        }
    };
    let result = match &cli.command {
        Command::Allocate(a) => allocate_cmd(a, stdout),
        Command::Oracle(a) => oracle_cmd(a, stdout),
        Command::Synth(a) => synth_cmd(a, stdout),
    };
    match result {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
