//! Greedy link construction at one epoch with the iteration trace.
//!
//! `cargo run --example schedule -- [au|shu|jhu] [epoch]`

use std::path::Path;

use satcoop::beamforming::build_codebook;
use satcoop::harness::{build_epoch, ScenarioConfig};
use satcoop::scheduling::{greedy_schedule, SchemeMode};

fn main() {
    let mut args = std::env::args().skip(1);
    let mode: SchemeMode = args.next().map_or(SchemeMode::Jhu, |s| s.parse().expect("au, shu or jhu"));
    let index: usize = args.next().map_or(0, |s| s.parse().expect("epoch index"));
    let cfg = ScenarioConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/desk.toml")).unwrap();
    let gus = cfg.ground_users().unwrap();
    let epoch = build_epoch(&cfg, &gus, &build_codebook(&cfg.array), index).unwrap();
    let out = greedy_schedule(&epoch.snapshot, mode).unwrap();

    println!("{mode} at t = {} s: {} iterations", epoch.time, out.iterations);
    println!("{:>4}{:>7}{:>5}  {:<12}{:>10}", "it", "cands", "sat", "GU", "dR");
    for t in &out.trace {
        println!(
            "{:>4}{:>7}{:>5}  {:<12}{:>10.4}{}",
            t.iteration,
            t.candidates,
            t.sat,
            gus[t.gu].label,
            t.delta_se,
            if t.committed { "" } else { "  (satellite full, dropped)" }
        );
    }
    println!("\nserving sets:");
    for &s in out.links.sat_ids() {
        let served = out.links.served(s);
        if !served.is_empty() {
            let names: Vec<_> = served.iter().map(|&g| gus[g].label.as_str()).collect();
            println!("  sat {s:>2}: {}", names.join(", "));
        }
    }
    println!("total SE {:.4} bits/s/Hz, unserved {:?}", out.total_se, out.unserved);
}
