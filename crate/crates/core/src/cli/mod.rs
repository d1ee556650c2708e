//! Command-line harness.
//!
//! Every command writes a JSON report `{command, status, seed, result}` to
//! stdout and, with `--output`, to a file. Exit codes: 0 success, 1 a check
//! or search failed, 2 usage error. A JSON config
//! `{command, params, seed, output_path}` is translated into the same flags,
//! so both entry points share one schema.

mod commands;
mod sets;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use sets::SetArgs;

#[derive(Debug, Parser)]
#[command(name = "sphere-frames", version, about = "Spherical harmonics, inequalities and orthogonal frames")]
pub struct Cli {
    /// Read the command and its parameters from a JSON file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Seed for randomized commands (mandatory for them).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evaluate P_{n,d}(t), or sweep P_{n,d}(0) over d.
    Gegenbauer(GegenbauerArgs),
    /// Funk-Hecke spectrum of a zonal set.
    Spectrum(SpectrumArgs),
    /// Zonal G_t(f, h) cross-checked by Monte Carlo.
    Gt(GtArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Extract an orthogonal frame from a set.
    FindFrame(FindFrameArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gegenbauer(_) => "gegenbauer",
            Command::Spectrum(_) => "spectrum",
            Command::Gt(_) => "gt",
            Command::Verify(_) => "verify",
            Command::FindFrame(_) => "find-frame",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GegenbauerArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Tabulate P_{n,d}(0) against 15/n³ for d = 0..=D instead.
    #[arg(long, value_name = "D")]
    pub sweep_zero: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub set: SetArgs,
    #[arg(long, default_value_t = crate::zonal::DEFAULT_D_MAX)]
    pub d_max: usize,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GtArgs {
    #[command(flatten)]
    pub set: SetArgs,
    /// Second set (same n and parameters); defaults to the first.
    #[arg(long, value_name = "NAME|PATH")]
    pub h: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = crate::zonal::DEFAULT_D_MAX)]
    pub d_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Gegenbauer,
    ZeroBound,
    Densities,
    LevelD,
    Gt,
    Hypercontractivity,
    Noise,
    Quadratic,
    Slicing,
    Frames,
    Budget,
}

impl Suite {
    pub fn randomized(self) -> bool {
        matches!(
            self,
            Suite::Gt | Suite::Hypercontractivity | Suite::Noise | Suite::Quadratic | Suite::Slicing | Suite::Frames
        )
    }
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[command(flatten)]
    pub set: SetArgs,
    /// Monte Carlo samples per estimate.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Number of random fixtures.
    #[arg(long)]
    pub count: Option<usize>,
    /// Seeded runs per frame fixture.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub d_max: Option<usize>,
    /// Largest n swept by the gegenbauer and zero-bound suites.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub outer: Option<u64>,
    #[arg(long)]
    pub inner: Option<u64>,
    #[arg(long)]
    pub n0: Option<usize>,
    /// Loss constant C of the budget chain.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub eps0: Option<f64>,
    /// Include the per-step ledger of the budget chain in the report.
    #[arg(long)]
    pub per_step: bool,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterArg {
    None,
    Degree2,
}

#[derive(Debug, Clone, Args)]
pub struct FindFrameArgs {
    #[command(flatten)]
    pub set: SetArgs,
    /// Search A itself rather than A ∪ (-A).
    #[arg(long)]
    pub no_symmetrize: bool,
    #[arg(long, default_value_t = 32)]
    pub candidates: usize,
    #[arg(long, default_value_t = 4096)]
    pub slice_samples: u64,
    #[arg(long, default_value_t = 4)]
    pub n0: usize,
    #[arg(long, default_value_t = 200)]
    pub terminal_trials: usize,
    #[arg(long, default_value_t = 100_000)]
    pub max_rejections: u64,
    #[arg(long, value_enum, default_value_t = FilterArg::None)]
    pub filter: FilterArg,
}

/// Top-level shape of a `--config` file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default)]
    pub params: serde_json::Map<String, Value>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub seed: Option<u64>,
    pub result: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Fail,
}

/// Failure of a run before a report exists.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Turns a config's `params` into command-line flags for `command`,
/// rejecting keys the command does not define.
pub fn config_to_args(config: &RunConfig) -> Result<Vec<OsString>, CliError> {
    let root = Cli::command();
    let sub = root
        .get_subcommands()
        .find(|c| c.get_name() == config.command)
        .ok_or_else(|| usage(format!("unknown command `{}`", config.command)))?;
    let mut args: Vec<OsString> = vec!["sphere-frames".into(), config.command.clone().into()];
    for (key, value) in &config.params {
        let flag = key.replace('_', "-");
        let known = sub.get_arguments().any(|a| {
            !a.is_global_set()
                && a
                    .get_long_and_visible_aliases()
                    .is_some_and(|names| names.contains(&flag.as_str()))
        });
        if !known || matches!(flag.as_str(), "help" | "version") {
            return Err(usage(format!("unknown key `{key}` in params for `{}`", config.command)));
        }
        match value {
            Value::Bool(true) => args.push(format!("--{flag}").into()),
            Value::Bool(false) | Value::Null => {}
            Value::Number(_) | Value::String(_) => {
                let text = match value {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                args.push(format!("--{flag}={text}").into());
            }
            _ => return Err(usage(format!("key `{key}` must be a scalar"))),
        }
    }
    if let Some(seed) = config.seed {
        args.push(format!("--seed={seed}").into());
    }
    if let Some(path) = &config.output_path {
        let mut a = OsString::from("--output=");
        a.push(path);
        args.push(a);
    }
    Ok(args)
}

fn parse(args: Vec<OsString>) -> Result<Cli, clap::Error> {
    Cli::try_parse_from(args)
}

/// Resolves flags or a config file into a parsed command line.
pub fn resolve(args: Vec<OsString>) -> Result<Cli, CliError> {
    let cli = parse(args).map_err(|e| usage(e.to_string()))?;
    let Some(path) = cli.config.clone() else {
        return Ok(cli);
    };
    if cli.command.is_some() {
        return Err(usage("--config cannot be combined with a subcommand"));
    }
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    let mut resolved = parse(config_to_args(&config)?).map_err(|e| usage(e.to_string()))?;
    // flags given next to --config override the file
    if cli.seed.is_some() {
        resolved.seed = cli.seed;
    }
    if cli.output.is_some() {
        resolved.output = cli.output;
    }
    Ok(resolved)
}

/// Executes a resolved command line and returns its report.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let command = cli
        .command
        .as_ref()
        .ok_or_else(|| usage("a subcommand or --config is required"))?;
    let (status, result) = commands::run(command, cli.seed)?;
    Ok(Report {
        command: command.name().to_string(),
        status,
        seed: cli.seed,
        result,
    })
}

/// Full entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return 0;
        }
        _ => match resolve(args) {
            Ok(cli) => cli,
            Err(e) => {
                eprintln!("{e}");
                return 2;
            }
        },
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let text = match serde_json::to_string_pretty(&report) {
        Ok(t) => t + "\n",
        Err(e) => {
            eprintln!("cannot serialize report: {e}");
            return 2;
        }
    };
    if let Some(path) = &cli.output {
        if let Err(e) = std::fs::write(path, &text) {
            eprintln!("cannot write {}: {e}", path.display());
            return 2;
        }
    }
    let _ = std::io::stdout().write_all(text.as_bytes());
    match report.status {
        Status::Ok => 0,
        Status::Fail => 1,
    }
}
