//! Visible-satellite counts for the bundled city list over eight hours.
//!
//! `cargo run --example coverage -- [china20|china80] [min_elevation_deg]`

use satcoop::geometry::{propagate, visibility, ConstellationConfig};
use satcoop::harness::builtin_gus;

fn main() {
    let mut args = std::env::args().skip(1);
    let dataset = args.next().unwrap_or_else(|| "china80".into());
    let min_el: f64 = args.next().map_or(10.0, |s| s.parse().expect("elevation in degrees"));
    let gus = builtin_gus(&dataset).expect("dataset is china20 or china80");
    let cfg = ConstellationConfig::default();
    println!(
        "{}x{} Walker, {} deg, {} km, period {:.1} min; {} GUs, min elevation {min_el} deg",
        cfg.planes,
        cfg.sats_per_plane,
        cfg.inclination,
        cfg.altitude,
        cfg.period() / 60.0,
        gus.len()
    );

    let mut worst = vec![usize::MAX; gus.len()];
    for epoch in 0..24 {
        let t = 1200.0 * epoch as f64;
        let vis = visibility(&propagate(&cfg, t), &gus, min_el);
        let counts: Vec<usize> = vis.per_gu.iter().map(|v| v.len()).collect();
        for (w, &c) in worst.iter_mut().zip(&counts) {
            *w = (*w).min(c);
        }
        println!(
            "t = {:>5} s  active sats {:>2}  |V_g| min {} max {} mean {:.2}",
            t,
            vis.per_sat.len(),
            counts.iter().min().unwrap(),
            counts.iter().max().unwrap(),
            counts.iter().sum::<usize>() as f64 / counts.len() as f64
        );
    }
    let mut ranked: Vec<_> = gus.iter().zip(&worst).collect();
    ranked.sort_by_key(|(_, &w)| w);
    println!("\nleast covered GUs (minimum |V_g| over all epochs):");
    for (g, w) in ranked.iter().take(5) {
        println!("  {:<12} {:>6.2}N {:>7.2}E  {w}", g.label, g.latitude, g.longitude);
    }
}
