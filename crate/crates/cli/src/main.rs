//! `qxfer`: run transfer simulations, sweeps, coupler tables and fidelity
//! queries from JSON run manifests.

mod commands;
mod error;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;
use manifest::{Kind, RunManifest};
use output::json_bytes;

#[derive(Parser)]
#[command(name = "qxfer", version, about = "Quantum state transfer between resonators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run manifest (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the manifest.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, env = "QXFER_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// One transfer: trajectory CSV and outcome JSON.
    Simulate(Common),
    /// Parameter sweep: table CSV and summary JSON.
    Sweep(Common),
    /// Coupler response table.
    Coupler {
        #[command(flatten)]
        common: Common,
        /// Mutual-inductance grid `start:stop:count` in pH.
        #[arg(long, allow_hyphen_values = true)]
        m_grid: Option<String>,
    },
    /// Fidelity of the transfer channel.
    Fidelity(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, kind, grid) = match &cli.command {
        Command::Simulate(c) => (c, Kind::Simulate, None),
        Command::Sweep(c) => (c, Kind::Sweep, None),
        Command::Coupler { common, m_grid } => (common, Kind::Coupler, m_grid.as_deref()),
        Command::Fidelity(c) => (c, Kind::Fidelity, None),
    };
    let grid = grid.map(commands::parse_grid).transpose()?;
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::validation("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::validation(e.to_string()))?;
    }

    let m = RunManifest::load(&common.config)?;
    if m.kind != kind {
        return Err(CliError::validation(format!(
            "{}: manifest is a `{}` run, not `{}`",
            common.config.display(),
            m.kind.name(),
            kind.name()
        )));
    }
    let seed = common.seed.or(m.seed);
    let mut staged = match kind {
        Kind::Simulate => commands::simulate(&m, seed)?,
        Kind::Sweep => commands::sweep(&m, seed)?,
        Kind::Coupler => commands::coupler(&m, grid)?,
        Kind::Fidelity => commands::fidelity(&m, seed)?,
    };
    let resolved = commands::resolved_manifest(&m, seed, &staged.names());
    staged.add("manifest.json".into(), json_bytes(&resolved));
    staged.commit(&common.out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qxfer: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
