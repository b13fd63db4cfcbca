//! Greedy against exhaustive search on small cut-outs of the scenario.
//!
//! `cargo run --release --example oracle -- [config]`

use std::path::PathBuf;

use satcoop::harness::{oracle_text, run_oracle, ScenarioConfig};

fn main() {
    let path = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/oracle.toml"), PathBuf::from);
    let cfg = ScenarioConfig::load(&path).unwrap();
    let records = run_oracle(&cfg).unwrap();
    print!("{}", oracle_text(&records));
    let unserved = records.iter().filter(|r| r.greedy_served < r.optimal_served).count();
    println!("greedy served fewer GUs than the optimum in {unserved}/{} records", records.len());
}
