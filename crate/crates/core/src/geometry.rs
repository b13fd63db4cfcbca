//! Constellation propagation and satellite/GU geometry.
//!
//! Spherical Earth, non-rotating inertial frame and circular two-body orbits.
//! Ground users co-rotate with the Earth at the sidereal rate. All angles in
//! the public types are degrees; distances are kilometres.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Earth gravitational parameter, km^3/s^2.
pub const MU_EARTH: f64 = 398_600.441_8;
/// Sidereal rotation rate, rad/s.
pub const EARTH_ROTATION_RATE: f64 = 7.292_115_9e-5;

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstellationConfig {
    pub planes: usize,
    pub sats_per_plane: usize,
    /// Degrees.
    pub inclination: f64,
    /// Kilometres above the spherical Earth.
    pub altitude: f64,
    #[serde(default = "default_phasing")]
    pub phasing_factor: i64,
    /// Seconds between the constellation reference time and simulation t = 0.
    #[serde(default)]
    pub epoch: f64,
}

fn default_phasing() -> i64 {
    1
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        Self {
            planes: 6,
            sats_per_plane: 8,
            inclination: 40.0,
            altitude: 1200.0,
            phasing_factor: 1,
            epoch: 0.0,
        }
    }
}

impl ConstellationConfig {
    pub fn total(&self) -> usize {
        self.planes * self.sats_per_plane
    }

    pub fn semi_major_axis(&self) -> f64 {
        EARTH_RADIUS_KM + self.altitude
    }

    /// Mean motion in rad/s.
    pub fn mean_motion(&self) -> f64 {
        (MU_EARTH / self.semi_major_axis().powi(3)).sqrt()
    }

    /// Orbital period in seconds.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.mean_motion()
    }

    /// RAAN and initial argument of latitude (both degrees) of satellite `id`
    /// under Walker-delta phasing.
    pub fn slot(&self, id: usize) -> (f64, f64) {
        let plane = id / self.sats_per_plane;
        let k = id % self.sats_per_plane;
        let raan = plane as f64 * 360.0 / self.planes as f64;
        let u0 = k as f64 * 360.0 / self.sats_per_plane as f64
            + plane as f64 * self.phasing_factor as f64 * 360.0 / self.total() as f64;
        (raan, u0.rem_euclid(360.0))
    }
}

/// Orthonormal satellite body frame: x along track, z toward nadir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyAxes {
    pub x: Vec3,
    pub y: Vec3,
    pub z: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SatelliteState {
    pub satellite_id: usize,
    pub position: Vec3,
    pub velocity: Vec3,
    pub body_axes: BodyAxes,
    /// Seconds since the constellation reference time; drives GU rotation.
    pub time: f64,
}

impl SatelliteState {
    /// Builds a state from position and velocity, deriving the body frame.
    pub fn new(satellite_id: usize, position: Vec3, velocity: Vec3, time: f64) -> Self {
        let z = -position.normalize();
        let along = velocity - z * velocity.dot(&z);
        let x = along.normalize();
        let y = z.cross(&x);
        Self {
            satellite_id,
            position,
            velocity,
            body_axes: BodyAxes { x, y, z },
            time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundUser {
    #[serde(default)]
    pub user_id: usize,
    pub latitude: f64,
    pub longitude: f64,
    #[serde(default)]
    pub altitude: f64,
    #[serde(default)]
    pub label: String,
}

impl GroundUser {
    pub fn new(user_id: usize, latitude: f64, longitude: f64, label: impl Into<String>) -> Self {
        Self {
            user_id,
            latitude,
            longitude,
            altitude: 0.0,
            label: label.into(),
        }
    }

    /// Inertial position at `time` seconds after the constellation reference.
    pub fn position_at(&self, time: f64) -> Vec3 {
        let r = EARTH_RADIUS_KM + self.altitude;
        let lat = self.latitude.to_radians();
        let lon = self.longitude.to_radians() + EARTH_ROTATION_RATE * time;
        Vec3::new(r * lat.cos() * lon.cos(), r * lat.cos() * lon.sin(), r * lat.sin())
    }
}

/// Great-circle distance between two GUs on the spherical Earth, km.
pub fn great_circle_km(a: &GroundUser, b: &GroundUser) -> f64 {
    let (la1, la2) = (a.latitude.to_radians(), b.latitude.to_radians());
    let dlat = la2 - la1;
    let dlon = (b.longitude - a.longitude).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + la1.cos() * la2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Elevation of the satellite above the GU horizon.
    pub elevation: f64,
    pub slant_range: f64,
    /// Azimuth of the GU direction in the satellite body frame.
    pub azimuth_sat: f64,
    /// Elevation of the GU direction above the body x-y (array) plane.
    pub elevation_sat: f64,
    /// Angle at the GU between the serving satellite and this satellite.
    pub off_boresight: f64,
}

fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    // atan2 form stays accurate near 0 and 180 degrees.
    a.cross(b).norm().atan2(a.dot(b)).to_degrees()
}

/// Circular two-body states for every satellite at `t` seconds.
pub fn propagate(config: &ConstellationConfig, t: f64) -> Vec<SatelliteState> {
    let a = config.semi_major_axis();
    let n = config.mean_motion();
    let inc = config.inclination.to_radians();
    let time = config.epoch + t;
    (0..config.total())
        .map(|id| {
            let (raan, u0) = config.slot(id);
            let raan = raan.to_radians();
            let u = u0.to_radians() + n * time;
            let (su, cu) = u.sin_cos();
            let (so, co) = raan.sin_cos();
            let (si, ci) = inc.sin_cos();
            let position = a * Vec3::new(co * cu - so * su * ci, so * cu + co * su * ci, su * si);
            let velocity =
                a * n * Vec3::new(-co * su - so * cu * ci, -so * su + co * cu * ci, cu * si);
            SatelliteState::new(id, position, velocity, time)
        })
        .collect()
}

/// Geometry of the `sat` -> `gu` link with the GU antenna aimed at `serving_sat`.
pub fn link_geometry(sat: &SatelliteState, gu: &GroundUser, serving_sat: &SatelliteState) -> LinkGeometry {
    let gu_pos = gu.position_at(sat.time);
    let to_sat = sat.position - gu_pos;
    let slant_range = to_sat.norm();
    let up = gu_pos.normalize();
    let vertical = to_sat.dot(&up);
    let elevation = vertical.atan2((to_sat - up * vertical).norm()).to_degrees();

    let d = -to_sat / slant_range;
    let axes = &sat.body_axes;
    let (dx, dy, dz) = (d.dot(&axes.x), d.dot(&axes.y), d.dot(&axes.z));
    let elevation_sat = dz.atan2(dx.hypot(dy)).to_degrees();
    let azimuth_sat = dy.atan2(dx).to_degrees();

    let off_boresight = if sat.satellite_id == serving_sat.satellite_id {
        0.0
    } else {
        angle_between(&(serving_sat.position - gu_pos), &to_sat)
    };

    LinkGeometry {
        elevation,
        slant_range,
        azimuth_sat,
        elevation_sat,
        off_boresight,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VisibilitySets {
    /// Indexed by GU position in the input slice.
    pub per_gu: Vec<BTreeSet<usize>>,
    /// Only satellites visible to at least one GU appear here.
    pub per_sat: BTreeMap<usize, BTreeSet<usize>>,
}

impl VisibilitySets {
    pub fn active_satellites(&self) -> impl Iterator<Item = usize> + '_ {
        self.per_sat.keys().copied()
    }

    pub fn is_consistent(&self) -> bool {
        let forward = self
            .per_gu
            .iter()
            .enumerate()
            .all(|(g, v)| v.iter().all(|s| self.per_sat.get(s).is_some_and(|c| c.contains(&g))));
        let backward = self
            .per_sat
            .iter()
            .all(|(s, c)| !c.is_empty() && c.iter().all(|&g| self.per_gu[g].contains(s)));
        forward && backward
    }
}

pub fn elevation_deg(sat: &SatelliteState, gu: &GroundUser) -> f64 {
    let gu_pos = gu.position_at(sat.time);
    let to_sat = sat.position - gu_pos;
    (to_sat.dot(&gu_pos.normalize()) / to_sat.norm()).clamp(-1.0, 1.0).asin().to_degrees()
}

pub fn visibility(states: &[SatelliteState], gus: &[GroundUser], min_elevation: f64) -> VisibilitySets {
    let mut sets = VisibilitySets {
        per_gu: vec![BTreeSet::new(); gus.len()],
        per_sat: BTreeMap::new(),
    };
    for (g, gu) in gus.iter().enumerate() {
        for sat in states {
            if elevation_deg(sat, gu) >= min_elevation {
                sets.per_gu[g].insert(sat.satellite_id);
                sets.per_sat.entry(sat.satellite_id).or_default().insert(g);
            }
        }
    }
    sets
}
