use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use peakon_cli::error::{CliError, EXIT_INVALID};
use peakon_cli::verify::Suite;
use peakon_cli::{parse_config, simulate, sweep, verify, RunConfig};

#[derive(Parser)]
#[command(
    name = "peakon",
    version,
    about = "Simulate and verify b-family peakon dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation; exit 0 completed, 2 wave breaking, 3 numerical failure, 4 I/O error.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `output.dir` in the config, then `out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and write report.json; exit 0 iff no check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the cartesian grid of the config's [sweep] section.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(parse_config(&text)?)
}

fn out_dir(cli: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    cli.or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Simulate { config, out } => {
            let cfg = load(&config)?;
            let outcome = simulate::simulate(&cfg, &out_dir(out, &cfg))?;
            println!(
                "{} samples, termination {:?}",
                outcome.rows, outcome.termination
            );
            Ok(outcome.exit_code)
        }
        Command::Verify { suite, out } => {
            let report = verify::verify(suite, &out)?;
            for c in &report.checks {
                println!(
                    "{:<13} {} measured {:.6e} bound {:.6e}",
                    format!("{:?}", c.status),
                    c.name,
                    c.measured,
                    c.bound
                );
            }
            println!(
                "{} pass, {} fail, {} inconclusive",
                report.passed, report.failed, report.inconclusive
            );
            Ok(report.exit_code())
        }
        Command::Sweep {
            config,
            out,
            workers,
        } => {
            let cfg = load(&config)?;
            let rows = sweep::sweep(&cfg, &out_dir(out, &cfg), workers)?;
            println!("{} cells", rows.len());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
