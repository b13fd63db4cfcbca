//! Link budget from one city to every visible satellite.
//!
//! `cargo run --example link_budget -- [city] [time_s]`

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use satcoop::channel::{channel_vector, linear_to_db, path_loss, vsat_gain, ArrayConfig, RfConfig, SmallScaleConfig};
use satcoop::geometry::{elevation_deg, link_geometry, propagate, visibility, ConstellationConfig};
use satcoop::harness::builtin_gus;

fn main() {
    let mut args = std::env::args().skip(1);
    let city = args.next().unwrap_or_else(|| "Beijing".into());
    let t: f64 = args.next().map_or(0.0, |s| s.parse().expect("time in seconds"));
    let gu = builtin_gus("china80")
        .unwrap()
        .into_iter()
        .find(|g| g.label == city)
        .unwrap_or_else(|| panic!("{city} is not in the bundled city list"));

    let rf = RfConfig::default();
    let array = ArrayConfig::default();
    let ss = SmallScaleConfig::default();
    let sats = propagate(&ConstellationConfig::default(), t);
    let vis = visibility(&sats, std::slice::from_ref(&gu), 10.0);
    let Some(&serving) = vis.per_gu[0].iter().max_by(|&&a, &&b| elevation_deg(&sats[a], &gu).total_cmp(&elevation_deg(&sats[b], &gu))) else {
        println!("{city} sees no satellite at t = {t} s");
        return;
    };
    println!(
        "{city} at t = {t} s, VSAT aimed at sat {serving}; noise {:.1} dBW, VSAT beamwidth {:.2} deg",
        linear_to_db(rf.noise_power()),
        rf.vsat_beamwidth()
    );
    println!(
        "{:>4}{:>8}{:>10}{:>9}{:>7}{:>9}{:>10}{:>12}",
        "sat", "el", "range km", "FSPL", "gas", "off-axis", "VSAT dBi", "|h|^2 dB"
    );
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for &s in &vis.per_gu[0] {
        let geom = link_geometry(&sats[s], &gu, &sats[serving]);
        let pl = path_loss(&geom, &rf, &mut rng).unwrap();
        let h = channel_vector(s, 0, &geom, &rf, &array, &ss, &mut rng).unwrap();
        println!(
            "{s:>4}{:>8.2}{:>10.1}{:>9.2}{:>7.2}{:>9.2}{:>10.2}{:>12.2}",
            geom.elevation,
            geom.slant_range,
            pl.basic,
            pl.gas,
            geom.off_boresight,
            vsat_gain(geom.off_boresight, &rf),
            linear_to_db(h.norm_sqr())
        );
    }
}
