//! Runs every scheme over a scenario, writes the result files and prints the
//! summary table.
//!
//! `cargo run --release --example compare -- [config] [out_dir]`

use std::path::PathBuf;

use satcoop::harness::{emit, run, summary_text, Format, RunOptions, ScenarioConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/desk.toml"), PathBuf::from);
    let out = args.next().map_or_else(|| std::env::temp_dir().join("satcoop-compare"), PathBuf::from);
    let cfg = ScenarioConfig::load(&path).unwrap();
    let report = run(&cfg, RunOptions::default()).unwrap();
    let files = emit(&report, &out, Format::Csv).unwrap();
    print!("{}", summary_text(&report));
    println!("\nwrote {} files to {}", files.len(), out.display());
}
