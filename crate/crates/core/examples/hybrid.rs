//! One satellite serving several GUs: analog-only power scaling against
//! analog + RZF, and what the digital stage does to leakage.
//!
//! `cargo run --example hybrid -- [config] [users]`

use std::path::PathBuf;

use satcoop::beamforming::build_codebook;
use satcoop::channel::linear_to_db;
use satcoop::harness::{build_epoch, ScenarioConfig};
use satcoop::metrics::user_metrics;
use satcoop::scheduling::{analog_scaled_beams, hybrid_beams, BeamSet, SatBeams};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/desk.toml"), PathBuf::from);
    let max_users: usize = args.next().map_or(6, |s| s.parse().expect("user count"));
    let cfg = ScenarioConfig::load(&path).unwrap();
    let gus = cfg.ground_users().unwrap();
    let epoch = build_epoch(&cfg, &gus, &build_codebook(&cfg.array), 0).unwrap();
    let snap = &epoch.snapshot;

    let sat = *snap
        .sat_ids()
        .iter()
        .max_by_key(|&&s| (0..gus.len()).filter(|&g| snap.is_visible(s, g)).count())
        .unwrap();
    let users: Vec<usize> = (0..gus.len()).filter(|&g| snap.is_visible(sat, g)).take(max_users).collect();
    let mut links = snap.empty_links();
    for &g in &users {
        links.set(sat, g, true);
    }
    println!("sat {sat} serving {} GUs at epoch 0; other satellites silent", users.len());

    let show = |name: &str, beams: SatBeams| {
        let power = beams.power();
        let set = BeamSet::from([(sat, beams)]);
        let m = user_metrics(snap, &links, &set);
        let total: f64 = m.iter().map(|u| u.se).sum();
        println!("\n{name}: total SE {total:.3} bits/s/Hz, transmit power {power:.3} W");
        println!("{:<12}{:>12}{:>16}{:>8}", "GU", "SINR dB", "interf dB", "SE");
        for &g in &users {
            let u = &m[g];
            println!(
                "{:<12}{:>12.2}{:>16.2}{:>8.3}",
                gus[g].label,
                linear_to_db(u.sinr),
                linear_to_db(u.interference_power.max(1e-30)),
                u.se
            );
        }
    };
    show("analog + power scaling", analog_scaled_beams(snap, sat, &users).unwrap());
    show("analog + RZF", hybrid_beams(snap, sat, &users).unwrap());
}
