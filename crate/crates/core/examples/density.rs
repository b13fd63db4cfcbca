//! Dense versus sparse GUs: classification and per-class SE.
//!
//! `cargo run --release --example density -- [threshold_km] [epochs]`

use std::path::Path;

use satcoop::harness::{run, RunOptions, ScenarioConfig};
use satcoop::metrics::{density_classes, Density};

fn main() {
    let mut args = std::env::args().skip(1);
    let threshold: f64 = args.next().map_or(400.0, |s| s.parse().expect("threshold in km"));
    let epochs: usize = args.next().map_or(4, |s| s.parse().expect("epoch count"));
    let mut cfg = ScenarioConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/full.toml")).unwrap();
    cfg.density_threshold = threshold;
    cfg.epochs.count = epochs;
    let gus = cfg.ground_users().unwrap();

    let classes = density_classes(&gus, threshold);
    let sparse: Vec<_> = classes.iter().filter(|c| c.class == Density::Sparse).map(|c| gus[c.gu_id].label.as_str()).collect();
    println!("{} GUs, threshold {threshold} km: {} dense, {} sparse", gus.len(), gus.len() - sparse.len(), sparse.len());
    println!("sparse: {}", sparse.join(", "));

    let report = run(&cfg, RunOptions::default()).unwrap();
    println!("\n{:<8}{:<8}{:>8}{:>10}{:>10}", "scheme", "class", "n", "mean SE", "var SE");
    for (scheme, by) in &report.summary.user_se {
        for (class, st) in by {
            println!("{:<8}{:<8}{:>8}{:>10.4}{:>10.4}", scheme.label(), format!("{class:?}").to_lowercase(), st.count, st.mean, st.variance);
        }
    }
}
