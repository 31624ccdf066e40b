use std::path::PathBuf;
use std::process::ExitCode;

use aelim_cli::{cmd_compare, cmd_eliminate, cmd_sweep, CliError, Overrides, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aelim", version, about = "Adiabatic elimination of bipartite Lindblad systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eliminate the fast subsystem and write the slow generators.
    Eliminate(Common),
    /// Propagate exact and eliminated dynamics and compare them.
    Compare(Common),
    /// Repeat the comparison over the [sweep] coupling values.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// exact, factorized or perturbative.
    #[arg(long)]
    method: Option<String>,
    /// Order of the slow generator: 0 for L0 only, 1 to resolve L1.
    #[arg(long)]
    order: Option<usize>,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let (common, cmd): (Common, fn(&RunConfig) -> Result<Vec<PathBuf>, CliError>) = match cli.command {
        Command::Eliminate(c) => (c, cmd_eliminate),
        Command::Compare(c) => (c, cmd_compare),
        Command::Sweep(c) => (c, cmd_sweep),
    };
    let overrides = Overrides { method: common.method, order: common.order, out: common.out };
    let cfg = RunConfig::load(&common.config, &overrides)?;
    cmd(&cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
