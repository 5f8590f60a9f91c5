use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use toomdtc::ensemble::set_threads;
use toomdtc::harness::{self, HarnessError};

#[derive(Parser)]
#[command(name = "toomdtc", version, about = "Run time-crystal protocol experiments from TOML configs")]
struct Cli {
    /// Worker threads for trajectory ensembles (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a single experiment point.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every value of the one swept key.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
    /// Cross-check the engines against each other and the exact oracle.
    OracleCheck {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        set_threads(n);
    }
    let result = match cli.cmd {
        Cmd::Run { config, out } => read(&config)
            .and_then(|t| harness::run(&t, out.as_deref()))
            .map(|s| println!("wrote {}", s.manifest.display())),
        Cmd::Sweep { config, out } => read(&config)
            .and_then(|t| harness::sweep(&t, out.as_deref()))
            .map(|s| println!("wrote {} ({} points)", s.manifest.display(), s.points.len())),
        Cmd::Validate { config } => read(&config)
            .and_then(|t| harness::validate(&t))
            .map(|n| println!("ok: {n} point(s)")),
        Cmd::OracleCheck { seed } => {
            let lines = harness::oracle_check(seed);
            for l in &lines {
                println!("{l}");
            }
            if lines.iter().all(|l| l.pass) {
                Ok(())
            } else {
                Err(HarnessError::Runtime("oracle check failed".into()))
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
