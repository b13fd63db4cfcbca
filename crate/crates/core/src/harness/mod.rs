//! Scenario files, experiment runs and result emission.
//!
//! ```no_run
//! use satcoop::harness::{emit, run, Format, RunOptions, ScenarioConfig};
//!
//! let cfg = ScenarioConfig::load("configs/desk.toml".as_ref())?;
//! let report = run(&cfg, RunOptions::default())?;
//! emit(&report, "out".as_ref(), Format::Csv)?;
//! # Ok::<(), satcoop::Error>(())
//! ```

mod config;
mod emit;
mod oracle;
mod run;

pub use config::{builtin_gus, BeamformingConfig, EpochConfig, GuSource, OracleConfig, ScenarioConfig};
pub use emit::{
    emit, link_rows, oracle_text, result_rows, summary_text, total_rows, trace_rows, user_rows, Format, LinkRow,
    ResultRow, TotalRow, TraceRow, UserRow,
};
pub use oracle::{run_oracle, sub_snapshot, OracleRecord};
pub use run::{
    build_epoch, config_hash, pairwise_gains, run, EpochCoverage, EpochSnapshot, PairGain, Provenance, RunOptions,
    RunReport, SchemeRun,
};
