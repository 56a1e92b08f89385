use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use paf_core::sample::{Exec, SampleConfig};
use paf_core::system::{analyze, bundled, equiv_check, load_system, BUNDLED};

#[derive(Parser)]
#[command(name = "paf", version, about = "Classify point-affine distributions and control-affine systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flags, bracket class, case label and invariants of one system.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Check a map between two systems and compare their invariants.
    Equiv {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Print a bundled system file, or list them when no name is given.
    Examples { name: Option<String> },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Opts {
    /// Sample points per numeric test.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Absolute tolerance of numeric zero tests.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include the sample points in the report.
    #[arg(long)]
    verbose: bool,
    /// Evaluate samples on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Opts {
    fn config(&self) -> Result<SampleConfig> {
        if self.samples == 0 {
            return Err(anyhow!("--samples must be positive"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(anyhow!("--tol must be a positive number"));
        }
        let exec = if self.sequential { Exec::Sequential } else { Exec::Parallel };
        Ok(SampleConfig::default().with_samples(self.samples).with_tol(self.tol).with_seed(self.seed).with_exec(exec))
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit(json: String, text: String, format: Format) {
    match format {
        Format::Json => out(&format!("{json}\n")),
        Format::Text => out(&text),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze { file, opts } => {
            let cfg = opts.config()?;
            let spec = load_system(&file).with_context(|| format!("loading {}", file.display()))?;
            let report = analyze(&spec.system, &cfg, opts.verbose)?;
            emit(report.to_json(), report.to_text(), opts.format);
            Ok(if report.rejection.is_some() { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Equiv { file, opts } => {
            let cfg = opts.config()?;
            let spec = load_system(&file).with_context(|| format!("loading {}", file.display()))?;
            let report = equiv_check(&spec, &cfg)?;
            emit(report.to_json(), report.to_text(), opts.format);
            Ok(if report.rejection.is_some() { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Examples { name: None } => {
            for (name, _) in BUNDLED {
                out(&format!("{name}\n"));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Examples { name: Some(name) } => {
            let text = bundled(&name).ok_or_else(|| {
                let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
                anyhow!("no bundled system `{name}`; available: {}", names.join(", "))
            })?;
            out(text);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
