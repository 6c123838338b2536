//! `cpforce`: Casimir-Polder atom-wall forces from the command line.

mod commands;
mod config;
mod error;
mod grid;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Layer, RunConfig};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "cpforce", version, about = "Casimir-Polder atom-wall forces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stationary potential and forces over a distance grid.
    Stationary(Flags),
    /// Force after a sudden switch-on: a time curve or a distance snapshot.
    Transient(Flags),
    /// Adiabatically moving atom, or the series report for a trajectory file.
    Adiabatic(Flags),
    /// Run the built-in self-checks.
    Verify(Flags),
}

/// Every flag has a config-file key of the same name with underscores.
#[derive(Args, Debug, Default)]
struct Flags {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Figure preset: fig1 or fig2.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    omega0: Option<String>,
    #[arg(long)]
    alpha0: Option<String>,
    /// c1 (c = 1) or atomic (c ≈ 137.036).
    #[arg(long)]
    units: Option<String>,
    /// Atom-wall distance.
    #[arg(long)]
    r: Option<String>,
    /// Release distance, a number or inf.
    #[arg(long)]
    r0: Option<String>,
    /// Snapshot time after switch-on.
    #[arg(long)]
    tau: Option<String>,
    /// min:max:n:lin|log
    #[arg(long)]
    r_grid: Option<String>,
    /// min:max:n
    #[arg(long)]
    tau_grid: Option<String>,
    /// Whitespace-separated `t r v` samples.
    #[arg(long)]
    trajectory: Option<String>,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<String>,
    /// Snapshot output when a time curve is also requested.
    #[arg(long)]
    snapshot_out: Option<String>,
    #[arg(long)]
    kmax: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long, hide = true)]
    tolerance_scale: Option<String>,
}

impl Flags {
    fn layer(&self) -> Layer {
        let mut layer = Layer::default();
        let pairs = [
            ("preset", &self.preset),
            ("omega0", &self.omega0),
            ("alpha0", &self.alpha0),
            ("units", &self.units),
            ("r", &self.r),
            ("r0", &self.r0),
            ("tau", &self.tau),
            ("r_grid", &self.r_grid),
            ("tau_grid", &self.tau_grid),
            ("trajectory", &self.trajectory),
            ("out", &self.out),
            ("snapshot_out", &self.snapshot_out),
            ("kmax", &self.kmax),
            ("tol", &self.tol),
            ("tolerance_scale", &self.tolerance_scale),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                layer.set(key, v);
            }
        }
        layer
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                Some(Layer::parse(&text, path)?)
            }
            None => None,
        };
        RunConfig::resolve(file, self.layer())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Stationary(f) => commands::stationary(&f.resolve()?),
        Command::Transient(f) => commands::transient(&f.resolve()?),
        Command::Adiabatic(f) => commands::adiabatic(&f.resolve()?),
        Command::Verify(f) => commands::verify(&f.resolve()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cpforce: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
