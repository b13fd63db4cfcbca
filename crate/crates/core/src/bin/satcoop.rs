//! Command-line front end: `run`, `validate` and `oracle`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use satcoop::harness::{emit, oracle_text, run, run_oracle, summary_text, Format, RunOptions, ScenarioConfig};
use satcoop::scheduling::SchemeMode;

#[derive(Parser)]
#[command(name = "satcoop", version, about = "Multi-satellite cooperative downlink simulator")]
struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every epoch and scheme and write result files.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: Format,
        /// Comma-separated subset of au, shu, jhu.
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<SchemeMode>>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write per-iteration greedy trace records.
        #[arg(long)]
        trace: bool,
    },
    /// Check a config file and list every problem found.
    Validate { config: PathBuf },
    /// Compare greedy scheduling with exhaustive search on small instances.
    Oracle { config: PathBuf },
}

/// Writes to stdout, ignoring a closed pipe.
fn say(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn load(path: &Path) -> satcoop::Result<ScenarioConfig> {
    let cfg = ScenarioConfig::load(path)?;
    cfg.validate()?;
    Ok(cfg)
}

fn main_inner(cli: Cli) -> satcoop::Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            format,
            schemes,
            seed,
            trace,
        } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(s) = schemes {
                cfg.schemes = s;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = run(&cfg, RunOptions { trace })?;
            let files = emit(&report, &out, format)?;
            say(&format!("{}wrote {} files to {}\n", summary_text(&report), files.len(), out.display()));
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let gus = cfg.ground_users()?;
            say(&format!(
                "{}: ok ({} GUs, {} satellites, {} epochs, schemes {})\n",
                config.display(),
                gus.len(),
                cfg.constellation.total(),
                cfg.epochs.count,
                cfg.schemes.iter().map(|s| s.label()).collect::<Vec<_>>().join(",")
            ));
        }
        Command::Oracle { config } => {
            let cfg = load(&config)?;
            say(&oracle_text(&run_oracle(&cfg)?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).init();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
