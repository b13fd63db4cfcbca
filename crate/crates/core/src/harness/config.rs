//! Scenario configuration (TOML) and validation.
//!
//! Every field has a default, so a minimal file only names what differs
//! from the desk-scale profile. See `configs/` for complete examples.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::beamforming::Regularization;
use crate::channel::{ArrayConfig, RfConfig, SmallScaleConfig};
use crate::error::ConfigIssue;
use crate::geometry::{ConstellationConfig, GroundUser};
use crate::scheduling::{BeamParams, SchemeMode};
use crate::{Error, Result};

const DEFAULT_DATASET: &str = "china20";
const CITIES_CN80: &str = include_str!("../../data/cities_cn80.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub schemes: Vec<SchemeMode>,
    /// Degrees.
    pub min_elevation: f64,
    /// Sparse/dense threshold, km.
    pub density_threshold: f64,
    /// Codewords combined per analog beam.
    pub codewords: usize,
    /// GU labels reported as per-user series.
    pub highlight: Vec<String>,
    pub constellation: ConstellationConfig,
    pub gus: GuSource,
    pub epochs: EpochConfig,
    pub rf: RfConfig,
    pub array: ArrayConfig,
    pub channel: SmallScaleConfig,
    pub beamforming: BeamformingConfig,
    pub oracle: OracleConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            schemes: SchemeMode::ALL.to_vec(),
            min_elevation: 10.0,
            density_threshold: 400.0,
            codewords: 4,
            highlight: ["Beijing", "Shanghai", "Wuhan", "Kashi", "Nansha"]
                .map(String::from)
                .to_vec(),
            constellation: ConstellationConfig::default(),
            gus: GuSource::default(),
            epochs: EpochConfig::default(),
            rf: RfConfig::default(),
            array: ArrayConfig::default(),
            channel: SmallScaleConfig::default(),
            beamforming: BeamformingConfig::default(),
            oracle: OracleConfig::default(),
        }
    }
}

/// Where the GU list comes from: a bundled dataset, a CSV file
/// (`label,latitude,longitude`) or an inline list. At most one may be set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuSource {
    /// `china80` or `china20` (the default when nothing is set).
    pub dataset: Option<String>,
    pub file: Option<PathBuf>,
    pub list: Option<Vec<GroundUser>>,
    /// Keep only the first `limit` entries.
    pub limit: Option<usize>,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpochConfig {
    /// Seconds.
    pub start: f64,
    /// Seconds.
    pub step: f64,
    pub count: usize,
}

impl Default for EpochConfig {
    fn default() -> Self {
        Self {
            start: 0.0,
            step: 1200.0,
            count: 10,
        }
    }
}

impl EpochConfig {
    pub fn time(&self, index: usize) -> f64 {
        self.start + self.step * index as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamformingConfig {
    pub regularization: Regularization,
    /// Per-beam power (W) of analog beams while AU/SHU score link increments.
    pub scoring_power: f64,
}

impl Default for BeamformingConfig {
    fn default() -> Self {
        Self {
            regularization: Regularization::Optimal,
            scoring_power: 1.0,
        }
    }
}

/// Small-instance settings for greedy-vs-exhaustive comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub instances: usize,
    pub max_sats: usize,
    pub max_gus: usize,
    pub n_beams: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            instances: 20,
            max_sats: 4,
            max_gus: 5,
            n_beams: 2,
        }
    }
}

fn parse_city_csv(text: &str, origin: &str) -> Result<Vec<GroundUser>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            path: origin.into(),
            message: e.to_string(),
        })?;
        let field = |k: usize| -> Result<f64> {
            row.get(k).and_then(|v| v.trim().parse().ok()).ok_or_else(|| Error::Parse {
                path: origin.into(),
                message: format!("row {}: bad numeric column {k}", i + 1),
            })
        };
        out.push(GroundUser::new(i, field(1)?, field(2)?, row.get(0).unwrap_or("").trim()));
    }
    Ok(out)
}

/// Bundled city list by name.
pub fn builtin_gus(name: &str) -> Option<Vec<GroundUser>> {
    let all = parse_city_csv(CITIES_CN80, "builtin:china80").expect("bundled data parses");
    match name {
        "china80" => Some(all),
        "china20" => Some(all.into_iter().take(20).collect()),
        _ => None,
    }
}

impl ScenarioConfig {
    /// Reads a TOML scenario; relative GU file paths resolve against the
    /// config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ScenarioConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if let Some(file) = &cfg.gus.file {
            if file.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.gus.file = Some(base.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn beam_params(&self) -> BeamParams {
        BeamParams {
            n_beams: self.array.beams(),
            tx_power: self.rf.tx_power,
            regularization: self.beamforming.regularization,
            scoring_power: self.beamforming.scoring_power,
        }
    }

    /// Resolved GU list with ids reassigned to list position.
    pub fn ground_users(&self) -> Result<Vec<GroundUser>> {
        let src = &self.gus;
        let mut gus = match (&src.dataset, &src.file, &src.list) {
            (None, None, None) => builtin_gus(DEFAULT_DATASET).expect("bundled dataset"),
            (Some(name), None, None) => builtin_gus(name).ok_or_else(|| {
                Error::Config(vec![ConfigIssue::new("gus.dataset", format!("unknown dataset `{name}`"))])
            })?,
            (None, Some(file), None) => {
                let text = std::fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
                parse_city_csv(&text, &file.display().to_string())?
            }
            (None, None, Some(list)) => list.clone(),
            _ => {
                return Err(Error::Config(vec![ConfigIssue::new(
                    "gus",
                    "set at most one of `dataset`, `file` or `list`",
                )]))
            }
        };
        if let Some(limit) = src.limit {
            gus.truncate(limit);
        }
        for (i, g) in gus.iter_mut().enumerate() {
            g.user_id = i;
        }
        Ok(gus)
    }

    /// All validation failures at once.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        let mut check = |ok: bool, field: &str, msg: &str| {
            if !ok {
                issues.push(ConfigIssue::new(field, msg));
            }
        };
        let c = &self.constellation;
        check(c.planes >= 1, "constellation.planes", "must be at least 1");
        check(c.sats_per_plane >= 1, "constellation.sats_per_plane", "must be at least 1");
        check((0.0..=180.0).contains(&c.inclination), "constellation.inclination", "must lie in [0, 180]");
        check(c.altitude > 0.0, "constellation.altitude", "must be positive");
        check(c.epoch.is_finite(), "constellation.epoch", "must be finite");

        let rf = &self.rf;
        for (v, f) in [
            (rf.carrier_frequency, "rf.carrier_frequency"),
            (rf.bandwidth, "rf.bandwidth"),
            (rf.tx_power, "rf.tx_power"),
            (rf.vsat_efficiency, "rf.vsat_efficiency"),
        ] {
            check(v > 0.0 && v.is_finite(), f, "must be positive");
        }
        for (v, f) in [
            (rf.noise_temperature, "rf.noise_temperature"),
            (rf.satellite_antenna_gain, "rf.satellite_antenna_gain"),
            (rf.vsat_max_gain, "rf.vsat_max_gain"),
        ] {
            check(v.is_finite(), f, "must be finite");
        }
        for (v, f) in [
            (rf.vsat_floor_db, "rf.vsat_floor_db"),
            (rf.gas_zenith_db, "rf.gas_zenith_db"),
            (rf.scintillation_db, "rf.scintillation_db"),
            (rf.shadow_fading_std_db, "rf.shadow_fading_std_db"),
        ] {
            check(v >= 0.0 && v.is_finite(), f, "must be non-negative");
        }

        let a = &self.array;
        check(a.n_x >= 1 && a.n_y >= 1, "array.n_x", "element counts must be at least 1");
        check(a.n_sub_x >= 1 && a.n_sub_y >= 1, "array.n_sub_x", "sub-array counts must be at least 1");
        check(a.element_spacing > 0.0, "array.element_spacing", "must be positive");
        check(
            self.codewords >= 1 && self.codewords <= a.elements().max(1),
            "codewords",
            "must lie in 1..=n_x*n_y",
        );

        let ch = &self.channel;
        check(ch.n_clusters >= 1, "channel.n_clusters", "must be at least 1");
        check(ch.n_rays >= 1, "channel.n_rays", "must be at least 1");
        check(ch.direct_amp_std_db >= 0.0, "channel.direct_amp_std_db", "must be non-negative");
        check(ch.angular_spread_deg >= 0.0, "channel.angular_spread_deg", "must be non-negative");

        check(!self.schemes.is_empty(), "schemes", "select at least one scheme");
        check(self.epochs.count >= 1, "epochs.count", "must be at least 1");
        check(self.epochs.start >= 0.0, "epochs.start", "must be non-negative");
        check(self.epochs.step >= 0.0, "epochs.step", "must be non-negative");
        check((0.0..90.0).contains(&self.min_elevation), "min_elevation", "must lie in [0, 90)");
        check(self.density_threshold > 0.0, "density_threshold", "must be positive");
        check(self.beamforming.scoring_power > 0.0, "beamforming.scoring_power", "must be positive");
        if let Regularization::Fixed(b) = self.beamforming.regularization {
            check(b >= 0.0 && b.is_finite(), "beamforming.regularization", "fixed beta must be non-negative");
        }
        check(self.oracle.n_beams >= 1, "oracle.n_beams", "must be at least 1");

        match self.ground_users() {
            Ok(gus) => {
                if gus.is_empty() {
                    issues.push(ConfigIssue::new("gus", "GU list is empty"));
                }
                for (i, g) in gus.iter().enumerate() {
                    if !(g.latitude.abs() <= 90.0) {
                        issues.push(ConfigIssue::new(format!("gus[{i}].latitude"), "must lie in [-90, 90]"));
                    }
                    if !(-180.0..180.0).contains(&g.longitude) {
                        issues.push(ConfigIssue::new(format!("gus[{i}].longitude"), "must lie in [-180, 180)"));
                    }
                }
            }
            Err(Error::Config(mut more)) => issues.append(&mut more),
            Err(e) => issues.push(ConfigIssue::new("gus", e.to_string())),
        }

        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_datasets() {
        let all = builtin_gus("china80").unwrap();
        assert_eq!(all.len(), 80);
        assert_eq!(builtin_gus("china20").unwrap().len(), 20);
        assert!(builtin_gus("mars").is_none());
        for name in ["Beijing", "Shanghai", "Wuhan", "Kashi", "Nansha"] {
            assert!(all[..20].iter().any(|g| g.label == name));
        }
    }

    #[test]
    fn defaults_validate() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn minimal_toml_uses_defaults() {
        let cfg: ScenarioConfig = toml::from_str("seed = 9\nschemes = [\"jhu\"]\n[epochs]\ncount = 2\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.schemes, vec![SchemeMode::Jhu]);
        assert_eq!(cfg.epochs.step, 1200.0);
        assert_eq!(cfg.constellation.planes, 6);
        cfg.validate().unwrap();
    }

    #[test]
    fn inline_gus_and_fixed_beta() {
        let text = r#"
            [gus]
            dataset = "china20"
            [beamforming]
            regularization = { fixed = 0.0 }
        "#;
        let cfg: ScenarioConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.beamforming.regularization, Regularization::Fixed(0.0));
        let text = r#"
            [gus]
            list = [{ latitude = 30.0, longitude = 110.0, label = "x" }]
        "#;
        let mut cfg: ScenarioConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.ground_users().unwrap()[0].label, "x");
        cfg.gus.dataset = Some("china20".into());
        assert!(cfg.validate().is_err(), "dataset plus list is ambiguous");
    }

    #[test]
    fn errors_carry_field_paths() {
        let mut cfg = ScenarioConfig::default();
        cfg.schemes.clear();
        cfg.constellation.altitude = -1.0;
        cfg.gus = GuSource {
            dataset: None,
            file: None,
            list: Some(vec![]),
            limit: None,
        };
        let Err(Error::Config(issues)) = cfg.validate() else {
            panic!("expected validation failure")
        };
        let fields: Vec<_> = issues.iter().map(|i| i.field.as_str()).collect();
        assert!(fields.contains(&"schemes"));
        assert!(fields.contains(&"constellation.altitude"));
        assert!(fields.contains(&"gus"));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<ScenarioConfig>("sede = 3").is_err());
    }

    #[test]
    fn config_roundtrips_through_toml() {
        let cfg = ScenarioConfig::default();
        let back: ScenarioConfig = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
