//! Per-GU SINR and spectral efficiency, density classes and summary
//! statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{great_circle_km, GroundUser};
use crate::scheduling::{BeamSet, LinkMatrix, SatBeams, SchemeMode, Snapshot};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserMetrics {
    pub gu_id: usize,
    /// Linear SINR; zero for unserved GUs.
    pub sinr: f64,
    /// `log2(1 + sinr)`, bits/s/Hz.
    pub se: f64,
    pub serving_sat: Option<usize>,
    pub signal_power: f64,
    pub interference_power: f64,
}

fn gain(h: &[C64], w: impl Iterator<Item = C64>) -> f64 {
    h.iter().zip(w).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr()
}

/// A beam set, optionally with one satellite's beams swapped out. Lets the
/// scheduler score a candidate without copying every satellite's matrix.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BeamView<'a> {
    pub base: &'a BeamSet,
    pub replace: Option<(usize, &'a SatBeams)>,
}

impl<'a> BeamView<'a> {
    fn get(&self, sat: usize) -> Option<&'a SatBeams> {
        match self.replace {
            Some((s, b)) if s == sat => Some(b),
            _ => self.base.get(&sat),
        }
    }
}

impl<'a> From<&'a BeamSet> for BeamView<'a> {
    fn from(base: &'a BeamSet) -> Self {
        Self { base, replace: None }
    }
}

/// `(serving, signal, interference)` at GU `gu` under `links` and `beams`,
/// with unit noise. `None` if the GU is unserved.
fn signal_and_interference(snap: &Snapshot, links: &LinkMatrix, beams: BeamView, gu: usize) -> Option<(usize, f64, f64)> {
    let serving = links.serving(gu)?;
    let mut signal = 0.0;
    let mut interference = 0.0;
    for &s in snap.visible(gu) {
        let Some(sb) = beams.get(s) else { continue };
        let h = &snap.link(s, gu).expect("visible link has data").channel;
        let amp2 = snap.vsat_amplitude(s, gu, serving).powi(2);
        for (j, &other) in sb.users.iter().enumerate() {
            let p = amp2 * gain(h, sb.hybrid.matrix.column(j).iter().copied());
            if other == gu && s == serving {
                signal += p;
            } else if other != gu {
                interference += p;
            }
        }
    }
    Some((serving, signal, interference))
}

/// SINR of GU `gu`; zero when unserved.
pub fn sinr(gu: usize, snap: &Snapshot, links: &LinkMatrix, beams: &BeamSet) -> f64 {
    signal_and_interference(snap, links, beams.into(), gu).map_or(0.0, |(_, s, i)| s / (i + 1.0))
}

/// Sum of per-GU SE, in GU order.
pub(crate) fn total_se_view(snap: &Snapshot, links: &LinkMatrix, beams: BeamView) -> f64 {
    (0..snap.n_gus())
        .filter_map(|g| signal_and_interference(snap, links, beams, g))
        .map(|(_, s, i)| (1.0 + s / (i + 1.0)).log2())
        .sum()
}

pub fn user_metrics(snap: &Snapshot, links: &LinkMatrix, beams: &BeamSet) -> Vec<UserMetrics> {
    (0..snap.n_gus())
        .map(|g| match signal_and_interference(snap, links, beams.into(), g) {
            Some((serving, signal, interference)) => {
                let sinr = signal / (interference + 1.0);
                UserMetrics {
                    gu_id: g,
                    sinr,
                    se: (1.0 + sinr).log2(),
                    serving_sat: Some(serving),
                    signal_power: signal,
                    interference_power: interference,
                }
            }
            None => UserMetrics {
                gu_id: g,
                sinr: 0.0,
                se: 0.0,
                serving_sat: None,
                signal_power: 0.0,
                interference_power: 0.0,
            },
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Density {
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityClass {
    pub gu_id: usize,
    pub class: Density,
    pub threshold_km: f64,
}

/// A GU is sparse when every other GU is farther than `threshold_km`.
pub fn density_classes(gus: &[GroundUser], threshold_km: f64) -> Vec<DensityClass> {
    gus.iter()
        .enumerate()
        .map(|(i, a)| {
            let sparse = gus
                .iter()
                .enumerate()
                .all(|(j, b)| i == j || great_circle_km(a, b) > threshold_km);
            DensityClass {
                gu_id: i,
                class: if sparse { Density::Sparse } else { Density::Dense },
                threshold_km,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub epoch_index: usize,
    /// Seconds after the first snapshot.
    pub epoch: f64,
    pub scheme: SchemeMode,
    pub users: Vec<UserMetrics>,
    pub total_se: f64,
    pub unserved: Vec<usize>,
}

/// Mean and population variance (divide by n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Stats {
            count: values.len(),
            mean,
            variance,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean_total_se: BTreeMap<SchemeMode, f64>,
    /// Per-user SE statistics by scheme and density class, pooled over epochs.
    pub user_se: BTreeMap<SchemeMode, BTreeMap<Density, Stats>>,
}

/// Summary statistics over all epochs. `classes` is indexed by GU id.
pub fn aggregate(results: &[ExperimentResult], classes: &[DensityClass]) -> Summary {
    let mut totals: BTreeMap<SchemeMode, Vec<f64>> = BTreeMap::new();
    let mut users: BTreeMap<SchemeMode, BTreeMap<Density, Vec<f64>>> = BTreeMap::new();
    for r in results {
        totals.entry(r.scheme).or_default().push(r.total_se);
        for u in &r.users {
            if let Some(c) = classes.get(u.gu_id) {
                users.entry(r.scheme).or_default().entry(c.class).or_default().push(u.se);
            }
        }
    }
    Summary {
        mean_total_se: totals
            .into_iter()
            .filter_map(|(k, v)| Stats::of(&v).map(|s| (k, s.mean)))
            .collect(),
        user_se: users
            .into_iter()
            .map(|(k, by)| (k, by.into_iter().filter_map(|(c, v)| Stats::of(&v).map(|s| (c, s))).collect()))
            .collect(),
    }
}

/// Relative gain `(a - b) / b`.
pub fn relative_gain(a: f64, b: f64) -> f64 {
    (a - b) / b
}
