//! MISO satellite-to-GU channel.
//!
//! `h = xi * h_s`, where `xi` folds path loss, both antenna gains and the
//! receiver noise power into one amplitude, and `h_s` is a Loo-distributed
//! small-scale vector built from UPA steering vectors. Because the noise
//! power is folded into `xi`, all SINR arithmetic downstream uses unit noise.
//!
//! Element `(p, q)` of a sub-array (p along the body x axis, q along y) lives
//! at flat index `p * n_y + q`. The DFT codebook uses the same order.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::geometry::LinkGeometry;
use crate::{Error, Result, C64};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfConfig {
    /// Hz.
    pub carrier_frequency: f64,
    /// Hz.
    pub bandwidth: f64,
    /// Receiver noise temperature, dBK.
    pub noise_temperature: f64,
    /// dBi.
    pub satellite_antenna_gain: f64,
    /// dBi.
    pub vsat_max_gain: f64,
    /// Aperture efficiency used to derive the VSAT 3 dB beamwidth.
    pub vsat_efficiency: f64,
    /// Front-to-back floor of the VSAT pattern, dB.
    pub vsat_floor_db: f64,
    /// Per-satellite transmit power, W.
    pub tx_power: f64,
    /// Zenith gaseous attenuation, dB (cosecant-scaled with elevation).
    pub gas_zenith_db: f64,
    /// Tropospheric scintillation allowance, dB.
    pub scintillation_db: f64,
    /// Log-normal shadow fading standard deviation, dB. Zero disables.
    pub shadow_fading_std_db: f64,
}

impl Default for RfConfig {
    fn default() -> Self {
        Self {
            carrier_frequency: 20e9,
            bandwidth: 400e6,
            noise_temperature: 24.0,
            satellite_antenna_gain: 21.5,
            vsat_max_gain: 40.0,
            vsat_efficiency: 0.65,
            vsat_floor_db: 30.0,
            tx_power: 80.0,
            gas_zenith_db: 0.5,
            scintillation_db: 0.3,
            shadow_fading_std_db: 1.2,
        }
    }
}

impl RfConfig {
    /// Receiver noise power k*T*B in watts.
    pub fn noise_power(&self) -> f64 {
        BOLTZMANN * db_to_linear(self.noise_temperature) * self.bandwidth
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Full VSAT beamwidth in degrees (edge to edge at -3 dB), from `G = eff * (pi D / lambda)^2`
    /// and `theta_3dB = 70 lambda / D`.
    pub fn vsat_beamwidth(&self) -> f64 {
        let d_over_lambda = (db_to_linear(self.vsat_max_gain) / self.vsat_efficiency).sqrt() / PI;
        70.0 / d_over_lambda
    }

    /// Off-axis angle at which the VSAT gain is 3 dB below its maximum.
    pub fn vsat_half_power_angle(&self) -> f64 {
        self.vsat_beamwidth() / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub n_sub_x: usize,
    pub n_sub_y: usize,
    pub n_x: usize,
    pub n_y: usize,
    /// Element spacing in wavelengths.
    pub element_spacing: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            n_sub_x: 8,
            n_sub_y: 4,
            n_x: 8,
            n_y: 8,
            element_spacing: 0.5,
        }
    }
}

impl ArrayConfig {
    /// Elements per sub-array.
    pub fn elements(&self) -> usize {
        self.n_x * self.n_y
    }

    /// Sub-arrays (RF chains, hence simultaneous beams) per satellite.
    pub fn beams(&self) -> usize {
        self.n_sub_x * self.n_sub_y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossBreakdown {
    pub basic: f64,
    pub gas: f64,
    pub scintillation: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmallScaleConfig {
    pub n_clusters: usize,
    pub n_rays: usize,
    /// Mean of `20 log10 |m_0|`.
    pub direct_amp_mean_db: f64,
    /// Standard deviation of `20 log10 |m_0|`.
    pub direct_amp_std_db: f64,
    /// Total diffuse power relative to a unit direct path, dB. `-inf` disables.
    pub multipath_power_db: f64,
    /// Laplacian angular spread (standard deviation) of cluster and ray offsets, degrees.
    pub angular_spread_deg: f64,
}

impl Default for SmallScaleConfig {
    fn default() -> Self {
        Self {
            n_clusters: 2,
            n_rays: 10,
            direct_amp_mean_db: -0.5,
            direct_amp_std_db: 1.0,
            multipath_power_db: -15.0,
            angular_spread_deg: 2.0,
        }
    }
}

impl SmallScaleConfig {
    fn direct_power_mean(&self) -> f64 {
        // |m0|^2 = 10^(X/10), X ~ N(mu, sigma) in dB
        let k = std::f64::consts::LN_10 / 10.0;
        (k * self.direct_amp_mean_db + 0.5 * (k * self.direct_amp_std_db).powi(2)).exp()
    }

    fn multipath_power(&self) -> f64 {
        db_to_linear(self.multipath_power_db)
    }

    /// Normalization making `E[||h_s||^2] = 1` for unit-norm steering vectors.
    pub fn delta(&self) -> f64 {
        (self.direct_power_mean() + self.multipath_power()).sqrt().recip()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub sat_id: usize,
    pub gu_id: usize,
    pub entries: Vec<C64>,
}

impl ChannelVector {
    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Normalized UPA steering vector for azimuth `phi` and elevation `theta`
/// (degrees, satellite body frame).
pub fn steering_vector(phi: f64, theta: f64, array: &ArrayConfig) -> Vec<C64> {
    let (phi, theta) = (phi.to_radians(), theta.to_radians());
    let u = theta.cos() * phi.cos();
    let v = theta.cos() * phi.sin();
    let k = 2.0 * PI * array.element_spacing;
    let scale = (array.elements() as f64).sqrt().recip();
    let mut out = Vec::with_capacity(array.elements());
    for p in 0..array.n_x {
        for q in 0..array.n_y {
            out.push(C64::from_polar(scale, -k * (p as f64 * u + q as f64 * v)));
        }
    }
    out
}

fn laplace<R: Rng + ?Sized>(rng: &mut R, std_dev: f64) -> f64 {
    let b = std_dev / std::f64::consts::SQRT_2;
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

/// Cluster/ray directions scattered around the line-of-sight direction.
pub fn draw_ray_angles<R: Rng + ?Sized>(phi0: f64, theta0: f64, cfg: &SmallScaleConfig, rng: &mut R) -> Vec<(f64, f64)> {
    let spread = cfg.angular_spread_deg;
    let mut rays = Vec::with_capacity(cfg.n_clusters * cfg.n_rays);
    for _ in 0..cfg.n_clusters {
        let cphi = phi0 + laplace(rng, spread);
        let ctheta = theta0 + laplace(rng, spread);
        for _ in 0..cfg.n_rays {
            rays.push((cphi + laplace(rng, spread), ctheta + laplace(rng, spread)));
        }
    }
    rays
}

/// Loo small-scale vector: a log-normal direct path plus Rayleigh diffuse rays.
pub fn small_scale<R: Rng + ?Sized>(
    phi0: f64,
    theta0: f64,
    rays: &[(f64, f64)],
    cfg: &SmallScaleConfig,
    array: &ArrayConfig,
    rng: &mut R,
) -> Vec<C64> {
    let delta = cfg.delta();
    let amp_db = Normal::new(cfg.direct_amp_mean_db, cfg.direct_amp_std_db)
        .expect("finite Loo parameters")
        .sample(rng);
    let phase = rng.random::<f64>() * 2.0 * PI;
    let m0 = C64::from_polar(10f64.powf(amp_db / 20.0), phase);

    let mut h: Vec<C64> = steering_vector(phi0, theta0, array).into_iter().map(|a| a * m0).collect();

    let per_ray = cfg.multipath_power() / rays.len().max(1) as f64;
    if per_ray > 0.0 {
        let sigma = (per_ray / 2.0).sqrt();
        for &(phi, theta) in rays {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let m = C64::new(re, im) * sigma;
            for (hi, ai) in h.iter_mut().zip(steering_vector(phi, theta, array)) {
                *hi += m * ai;
            }
        }
    }
    for hi in &mut h {
        *hi *= delta;
    }
    h
}

/// Large-scale loss with one shadow-fading draw.
pub fn path_loss<R: Rng + ?Sized>(geom: &LinkGeometry, rf: &RfConfig, rng: &mut R) -> Result<PathLossBreakdown> {
    if geom.elevation <= 0.0 {
        return Err(Error::LinkInvalid {
            elevation_deg: geom.elevation,
        });
    }
    let shadow: f64 = rng.sample::<f64, _>(StandardNormal) * rf.shadow_fading_std_db;
    let range_m = geom.slant_range * 1e3;
    let fspl = 20.0 * (4.0 * PI * range_m * rf.carrier_frequency / SPEED_OF_LIGHT).log10();
    let basic = fspl + shadow;
    let gas = rf.gas_zenith_db / geom.elevation.to_radians().sin();
    let scintillation = rf.scintillation_db;
    Ok(PathLossBreakdown {
        basic,
        gas,
        scintillation,
        total: basic + gas + scintillation,
    })
}

/// VSAT receive gain (dBi) at `off_boresight` degrees.
pub fn vsat_gain(off_boresight: f64, rf: &RfConfig) -> f64 {
    let ratio = off_boresight / rf.vsat_beamwidth();
    rf.vsat_max_gain - (12.0 * ratio * ratio).min(rf.vsat_floor_db)
}

/// Amplitude `xi` for a link with the given loss and VSAT pointing error.
pub fn large_scale_amplitude(pl: &PathLossBreakdown, off_boresight: f64, rf: &RfConfig) -> f64 {
    let gain_db = rf.satellite_antenna_gain + vsat_gain(off_boresight, rf) - pl.total;
    (db_to_linear(gain_db) / rf.noise_power()).sqrt()
}

/// Full channel draw for one link. Consumes, in order: one shadow-fading
/// sample, the ray angles and the small-scale coefficients.
pub fn channel_vector<R: Rng + ?Sized>(
    sat_id: usize,
    gu_id: usize,
    geom: &LinkGeometry,
    rf: &RfConfig,
    array: &ArrayConfig,
    sscfg: &SmallScaleConfig,
    rng: &mut R,
) -> Result<ChannelVector> {
    let pl = path_loss(geom, rf, rng)?;
    let xi = large_scale_amplitude(&pl, geom.off_boresight, rf);
    let rays = draw_ray_angles(geom.azimuth_sat, geom.elevation_sat, sscfg, rng);
    let hs = small_scale(geom.azimuth_sat, geom.elevation_sat, &rays, sscfg, array, rng);
    Ok(ChannelVector {
        sat_id,
        gu_id,
        entries: hs.into_iter().map(|z| z * xi).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_relative_eq;

    fn geom(range: f64, elevation: f64) -> LinkGeometry {
        LinkGeometry {
            elevation,
            slant_range: range,
            azimuth_sat: 10.0,
            elevation_sat: 70.0,
            off_boresight: 0.0,
        }
    }

    fn no_shadow() -> RfConfig {
        RfConfig {
            shadow_fading_std_db: 0.0,
            ..RfConfig::default()
        }
    }

    fn deterministic_direct() -> SmallScaleConfig {
        SmallScaleConfig {
            direct_amp_mean_db: 0.0,
            direct_amp_std_db: 0.0,
            multipath_power_db: f64::NEG_INFINITY,
            ..SmallScaleConfig::default()
        }
    }

    #[test]
    fn nadir_steering_is_flat() {
        let arr = ArrayConfig::default();
        let a = steering_vector(37.0, 90.0, &arr);
        for z in &a {
            assert_relative_eq!(z.re, 0.125, epsilon = 1e-12);
            assert!(z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn steering_phases_2x2() {
        let arr = ArrayConfig {
            n_x: 2,
            n_y: 2,
            ..ArrayConfig::default()
        };
        let a = steering_vector(0.0, 0.0, &arr);
        let expect = [0.0, 0.0, -PI, -PI];
        for (z, ph) in a.iter().zip(expect) {
            let want = C64::from_polar(0.5, ph);
            assert!((z - want).norm() < 1e-12);
        }
    }

    #[test]
    fn direct_only_channel_is_scaled_steering() {
        let arr = ArrayConfig::default();
        let cfg = deterministic_direct();
        let mut rng = substream(1, 0);
        let h = small_scale(20.0, 60.0, &[], &cfg, &arr, &mut rng);
        let a = steering_vector(20.0, 60.0, &arr);
        assert_relative_eq!(cfg.delta(), 1.0, epsilon = 1e-15);
        let norm: f64 = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
        // equal up to the uniform phase of m0
        let rot = h[0] / a[0];
        for (hi, ai) in h.iter().zip(&a) {
            assert!((hi - ai * rot).norm() < 1e-12);
        }
    }

    #[test]
    fn small_scale_seed_determinism() {
        let arr = ArrayConfig::default();
        let cfg = SmallScaleConfig::default();
        let draw = || {
            let mut rng = substream(99, 5);
            let rays = draw_ray_angles(30.0, 50.0, &cfg, &mut rng);
            small_scale(30.0, 50.0, &rays, &cfg, &arr, &mut rng)
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn normalization_monte_carlo() {
        let arr = ArrayConfig::default();
        let cfg = SmallScaleConfig::default();
        let mut rng = substream(2024, 0);
        let n = 10_000;
        let mean = (0..n)
            .map(|_| {
                let rays = draw_ray_angles(15.0, 65.0, &cfg, &mut rng);
                small_scale(15.0, 65.0, &rays, &cfg, &arr, &mut rng)
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn fspl_1200km_20ghz() {
        let mut rng = substream(0, 0);
        let pl = path_loss(&geom(1200.0, 90.0), &no_shadow(), &mut rng).unwrap();
        let expect = 20.0 * (4.0 * PI * 1.2e6 * 2e10 / SPEED_OF_LIGHT).log10();
        assert_relative_eq!(pl.basic, expect, epsilon = 1e-9);
        assert!((pl.basic - 180.05).abs() < 0.01);
        assert_relative_eq!(pl.total, pl.basic + pl.gas + pl.scintillation, epsilon = 1e-12);
    }

    #[test]
    fn fspl_doubling_range() {
        let mut rng = substream(0, 0);
        let a = path_loss(&geom(1000.0, 45.0), &no_shadow(), &mut rng).unwrap();
        let b = path_loss(&geom(2000.0, 45.0), &no_shadow(), &mut rng).unwrap();
        assert_relative_eq!(b.basic - a.basic, 20.0 * 2f64.log10(), epsilon = 1e-9);
    }

    #[test]
    fn gas_cosecant() {
        let mut rng = substream(0, 0);
        let rf = no_shadow();
        let z = path_loss(&geom(1200.0, 90.0), &rf, &mut rng).unwrap();
        let low = path_loss(&geom(1200.0, 30.0), &rf, &mut rng).unwrap();
        assert_relative_eq!(low.gas, 2.0 * z.gas, epsilon = 1e-12);
    }

    #[test]
    fn below_horizon_is_invalid() {
        let mut rng = substream(0, 0);
        assert!(matches!(
            path_loss(&geom(3000.0, -1.0), &no_shadow(), &mut rng),
            Err(Error::LinkInvalid { .. })
        ));
        assert!(path_loss(&geom(3000.0, 0.0), &no_shadow(), &mut rng).is_err());
    }

    #[test]
    fn vsat_pattern_points() {
        let rf = RfConfig::default();
        assert_relative_eq!(vsat_gain(0.0, &rf), 40.0);
        assert_relative_eq!(vsat_gain(rf.vsat_beamwidth(), &rf), 28.0, epsilon = 1e-12);
        assert_relative_eq!(vsat_gain(rf.vsat_half_power_angle(), &rf), 37.0, epsilon = 1e-12);
        assert_relative_eq!(vsat_gain(180.0, &rf), 10.0);
    }

    #[test]
    fn path_loss_plus_10db_scales_amplitude() {
        let rf = RfConfig::default();
        let pl = PathLossBreakdown {
            basic: 180.0,
            gas: 0.5,
            scintillation: 0.3,
            total: 180.8,
        };
        let worse = PathLossBreakdown {
            total: 190.8,
            ..pl
        };
        let r = large_scale_amplitude(&worse, 0.0, &rf) / large_scale_amplitude(&pl, 0.0, &rf);
        assert_relative_eq!(r, 10f64.powf(-0.5), max_relative = 1e-12);
    }

    #[test]
    fn zenith_link_budget() {
        // 21.5 + 40 - (FSPL + 0.5 + 0.3) - 10 log10(k T B), computed by hand
        let rf = no_shadow();
        let mut rng = substream(0, 0);
        let pl = path_loss(&geom(1200.0, 90.0), &rf, &mut rng).unwrap();
        let xi2 = large_scale_amplitude(&pl, 0.0, &rf).powi(2);
        let fspl = 20.0 * (4.0 * PI * 1.2e6 * 2e10 / 299_792_458.0f64).log10();
        let ktb_db = 10.0 * (1.380_649e-23f64).log10() + 24.0 + 10.0 * 4e8f64.log10();
        let expect_db = 21.5 + 40.0 - (fspl + 0.8) - ktb_db;
        assert!(xi2.is_finite() && xi2 > 0.0);
        assert_relative_eq!(linear_to_db(xi2), expect_db, epsilon = 1e-9);
        // regression pin: about -0.77 dB per watt of beam power at zenith
        assert!((linear_to_db(xi2) - (-0.77)).abs() < 0.01, "{}", linear_to_db(xi2));
    }

    #[test]
    fn boresight_channel_uses_max_vsat_gain() {
        let rf = no_shadow();
        let arr = ArrayConfig::default();
        let cfg = deterministic_direct();
        let g = geom(1200.0, 90.0);
        let h = channel_vector(0, 0, &g, &rf, &arr, &cfg, &mut substream(3, 3)).unwrap();
        let mut rng = substream(3, 3);
        let pl = path_loss(&g, &rf, &mut rng).unwrap();
        let expect = db_to_linear(rf.satellite_antenna_gain + 40.0 - pl.total) / rf.noise_power();
        assert_relative_eq!(h.norm_sqr(), expect, max_relative = 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn steering_unit_norm(phi in -180.0..180.0f64, theta in -90.0..90.0f64) {
                let a = steering_vector(phi, theta, &ArrayConfig::default());
                let n: f64 = a.iter().map(|z| z.norm_sqr()).sum();
                prop_assert!((n - 1.0).abs() < 1e-12);
            }

            #[test]
            fn vsat_monotone(a in 0.0..180.0f64, b in 0.0..180.0f64) {
                let rf = RfConfig::default();
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(vsat_gain(lo, &rf) >= vsat_gain(hi, &rf));
            }
        }
    }
}
