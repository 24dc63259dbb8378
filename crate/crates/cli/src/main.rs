use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use heat_impulse_cli::commands::{cmd_oracle, cmd_solve, cmd_sweep, cmd_verify, Outcome, EXIT_OK};
use heat_impulse_cli::RunConfig;

#[derive(Parser)]
#[command(name = "heat-impulse", version, about = "Minimal-time impulse control of the heat equation")]
struct Cli {
    /// Seed override for `random:` initial-state presets.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute t*, u* and the optimality certificate.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every (M, tau) cell of the configured grid and write a CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Recompute the certificate of a stored solve record.
    Verify {
        /// Defaults to the config echoed in the record.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        record: PathBuf,
    },
    /// Compare the solver with the brute-force grid oracle (at most 3 modes).
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<RunConfig, Outcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Outcome::usage(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::parse(&text)
        .map(|c| c.with_seed(seed))
        .map_err(|e| Outcome::usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Outcome {
    let seed = cli.seed;
    match cli.command {
        Command::Solve { config, out } => match load(&config, seed) {
            Ok(cfg) => cmd_solve(&cfg, out.as_deref()),
            Err(o) => o,
        },
        Command::Sweep { config, out, threads } => match load(&config, seed) {
            Ok(cfg) => cmd_sweep(&cfg, out.as_deref(), threads),
            Err(o) => o,
        },
        Command::Verify { config, record } => {
            let cfg = match config.map(|c| load(&c, seed)).transpose() {
                Ok(c) => c,
                Err(o) => return o,
            };
            cmd_verify(cfg.as_ref(), &record)
        }
        Command::Oracle { config } => match load(&config, seed) {
            Ok(cfg) => cmd_oracle(&cfg),
            Err(o) => o,
        },
    }
}

fn main() -> ExitCode {
    let outcome = run(Cli::parse());
    if outcome.code == EXIT_OK {
        print!("{}", outcome.message);
    } else {
        eprint!("{}", outcome.message);
        if !outcome.message.ends_with('\n') {
            eprintln!();
        }
    }
    ExitCode::from(outcome.code as u8)
}
