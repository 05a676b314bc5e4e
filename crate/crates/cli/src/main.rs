use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rotset_cli::commands::{self, CmdError, EXIT_ESTIMATOR, EXIT_OK};

#[derive(Parser)]
#[command(name = "rotset", version, about = "Rotation sets of torus maps and their projective pushforwards")]
struct Cli {
    /// Worker threads for the parallel backend (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classical rotation-set estimate of the configured map.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        /// Report path (default: `report` from the config, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hypothesis gate, discontinuity certificate and theorem check for the configured matrix.
    Pushforward {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for the empirical discontinuity check (overrides `[run] seed`).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// SVG figure of a report.
    Render {
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quick built-in checks; prints one PASS/FAIL line each.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn configure_threads(threads: Option<usize>) -> Result<(), CmdError> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(CmdError::config(anyhow::anyhow!("--threads must be at least 1")));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(CmdError::config)?;
    Ok(())
}

fn run(cli: Cli) -> Result<u8, CmdError> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Estimate { config, out } => {
            let cfg = commands::load_config(&config)?;
            commands::cmd_estimate(&cfg, out.as_deref())
        }
        Command::Pushforward { config, out, seed } => {
            let cfg = commands::load_config(&config)?;
            commands::cmd_pushforward(&cfg, seed.unwrap_or(cfg.seed), out.as_deref())
        }
        Command::Render { report, out } => commands::cmd_render(&report, out.as_deref()),
        Command::Selftest { seed } => {
            let checks = commands::selftest(seed);
            for c in &checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if checks.iter().all(|c| c.pass) { EXIT_OK } else { EXIT_ESTIMATOR })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
