//! Multi-codeword analog beams against the best single DFT codeword.
//!
//! `cargo run --example codebook -- [draws]`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use satcoop::beamforming::{analog_beamform, build_codebook, codeword_scores, inner};
use satcoop::channel::{draw_ray_angles, small_scale, ArrayConfig, SmallScaleConfig};

fn main() {
    let draws: usize = std::env::args().nth(1).map_or(500, |s| s.parse().expect("draw count"));
    let array = ArrayConfig::default();
    let ss = SmallScaleConfig::default();
    let cb = build_codebook(&array);
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let channels: Vec<_> = (0..draws)
        .map(|_| {
            let (phi, theta) = (rng.random_range(-180.0..180.0), rng.random_range(30.0..90.0));
            let rays = draw_ray_angles(phi, theta, &ss, &mut rng);
            small_scale(phi, theta, &rays, &ss, &array, &mut rng)
        })
        .collect();

    println!("{}x{} array, {} codewords, {draws} channel draws", array.n_x, array.n_y, cb.size());
    println!("{:>3}{:>20}{:>10}", "K", "mean gain / best", "wins");
    for k in 1..=8 {
        let mut ratio = 0.0;
        let mut wins = 0;
        for h in &channels {
            let best = codeword_scores(h, &cb).into_iter().fold(0.0, f64::max);
            let w = analog_beamform(h, &cb, k).unwrap();
            let g = inner(h, &w.entries).norm_sqr();
            ratio += g / best;
            wins += usize::from(g >= best * (1.0 - 1e-12));
        }
        println!("{k:>3}{:>20.4}{:>10}", ratio / draws as f64, format!("{wins}/{draws}"));
    }
}
