//! Experiment orchestration: one snapshot per epoch, every configured scheme
//! evaluated on the same channel draws.

use std::collections::BTreeMap;

use log::{debug, info};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::ScenarioConfig;
use crate::beamforming::{analog_beamform, build_codebook, Codebook};
use crate::channel::{channel_vector, db_to_linear, vsat_gain};
use crate::geometry::{link_geometry, propagate, visibility, GroundUser, SatelliteState};
use crate::metrics::{aggregate, density_classes, relative_gain, user_metrics, DensityClass, ExperimentResult, Summary};
use crate::rng::{link_stream, substream};
use crate::scheduling::{greedy_schedule, LinkData, LinkMatrix, SchemeMode, Snapshot, TraceRecord};
use crate::Result;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep per-iteration greedy trace records.
    pub trace: bool,
}

/// Channels and visibility of one epoch, shared by every scheme.
#[derive(Debug, Clone)]
pub struct EpochSnapshot {
    pub index: usize,
    /// Seconds after simulation start.
    pub time: f64,
    pub satellites: Vec<SatelliteState>,
    pub snapshot: Snapshot,
}

/// Builds the scheduling snapshot of epoch `index`. Each visible link draws
/// from its own substream, so the result does not depend on which other
/// links or schemes are evaluated.
pub fn build_epoch(cfg: &ScenarioConfig, gus: &[GroundUser], codebook: &Codebook, index: usize) -> Result<EpochSnapshot> {
    let time = cfg.epochs.time(index);
    let satellites = propagate(&cfg.constellation, time);
    let vis = visibility(&satellites, gus, cfg.min_elevation);
    let visible: Vec<Vec<usize>> = vis.per_gu.iter().map(|v| v.iter().copied().collect()).collect();

    let mut links = BTreeMap::new();
    for (g, gu) in gus.iter().enumerate() {
        for &s in &visible[g] {
            let sat = &satellites[s];
            let geom = link_geometry(sat, gu, sat);
            let mut rng = substream(cfg.seed, link_stream(index as u32, s, g));
            let h = channel_vector(s, g, &geom, &cfg.rf, &cfg.array, &cfg.channel, &mut rng)?;
            let analog = analog_beamform(&h.entries, codebook, cfg.codewords)?.entries;
            let vsat_amplitude = visible[g]
                .iter()
                .filter(|&&o| o != s)
                .map(|&o| {
                    let off = link_geometry(sat, gu, &satellites[o]).off_boresight;
                    (o, db_to_linear(vsat_gain(off, &cfg.rf) - cfg.rf.vsat_max_gain).sqrt())
                })
                .collect();
            links.insert(
                (s, g),
                LinkData {
                    channel: h.entries,
                    analog,
                    vsat_amplitude,
                },
            );
        }
    }
    Ok(EpochSnapshot {
        index,
        time,
        satellites,
        snapshot: Snapshot::new(visible, links, cfg.beam_params())?,
    })
}

/// Everything one scheme produced at one epoch besides the per-GU metrics.
#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub epoch_index: usize,
    pub scheme: SchemeMode,
    pub links: LinkMatrix,
    /// `sum_g ||w_sg||^2` of every satellite that carries beams.
    pub sat_power: BTreeMap<usize, f64>,
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
}

/// Visible-satellite counts of one epoch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochCoverage {
    pub epoch_index: usize,
    pub visible_counts: Vec<usize>,
    pub uncovered: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    /// SHA-256 of the effective configuration serialized as TOML.
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairGain {
    pub scheme: SchemeMode,
    pub baseline: SchemeMode,
    /// `(mean_a - mean_b) / mean_b` over mean total SE.
    pub gain: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub options: RunOptions,
    pub gus: Vec<GroundUser>,
    pub classes: Vec<DensityClass>,
    /// Epoch-major, schemes in configured order within each epoch.
    pub results: Vec<ExperimentResult>,
    /// Parallel to `results`.
    pub runs: Vec<SchemeRun>,
    pub coverage: Vec<EpochCoverage>,
    pub summary: Summary,
    pub gains: Vec<PairGain>,
    pub provenance: Provenance,
}

impl RunReport {
    pub fn result(&self, epoch_index: usize, scheme: SchemeMode) -> Option<&ExperimentResult> {
        self.results.iter().find(|r| r.epoch_index == epoch_index && r.scheme == scheme)
    }

    /// Mean total SE of `scheme` over all epochs.
    pub fn mean_total_se(&self, scheme: SchemeMode) -> Option<f64> {
        self.summary.mean_total_se.get(&scheme).copied()
    }

    pub fn gain(&self, scheme: SchemeMode, baseline: SchemeMode) -> Option<f64> {
        self.gains
            .iter()
            .find(|g| g.scheme == scheme && g.baseline == baseline)
            .map(|g| g.gain)
    }
}

pub fn config_hash(cfg: &ScenarioConfig) -> Result<String> {
    let digest = Sha256::digest(cfg.to_toml()?.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Pairwise gains of each scheme over every lower-ranked one (AU < SHU < JHU).
pub fn pairwise_gains(summary: &Summary) -> Vec<PairGain> {
    let mut out = Vec::new();
    for (&a, &ma) in summary.mean_total_se.iter().rev() {
        for (&b, &mb) in &summary.mean_total_se {
            if b < a {
                out.push(PairGain {
                    scheme: a,
                    baseline: b,
                    gain: relative_gain(ma, mb),
                });
            }
        }
    }
    out
}

fn run_epoch(cfg: &ScenarioConfig, gus: &[GroundUser], codebook: &Codebook, index: usize, opts: RunOptions) -> Result<(EpochCoverage, Vec<(ExperimentResult, SchemeRun)>)> {
    let epoch = build_epoch(cfg, gus, codebook, index)?;
    let snap = &epoch.snapshot;
    let visible_counts: Vec<usize> = (0..gus.len()).map(|g| snap.visible(g).len()).collect();
    let coverage = EpochCoverage {
        epoch_index: index,
        uncovered: (0..gus.len()).filter(|&g| visible_counts[g] == 0).collect(),
        visible_counts,
    };
    let mut out = Vec::with_capacity(cfg.schemes.len());
    for &scheme in &cfg.schemes {
        let mut o = greedy_schedule(snap, scheme)?;
        let users = user_metrics(snap, &o.links, &o.beams);
        debug!("epoch {index} {scheme}: total SE {:.4}, {} iterations", o.total_se, o.iterations);
        if !opts.trace {
            o.trace.clear();
        }
        out.push((
            ExperimentResult {
                epoch_index: index,
                epoch: epoch.time,
                scheme,
                users,
                total_se: o.total_se,
                unserved: o.unserved,
            },
            SchemeRun {
                epoch_index: index,
                scheme,
                sat_power: o.beams.iter().map(|(&s, b)| (s, b.power())).collect(),
                links: o.links,
                iterations: o.iterations,
                trace: o.trace,
            },
        ));
    }
    Ok((coverage, out))
}

/// Validates `cfg` and runs every `(epoch, scheme)` pair. Epochs run in
/// parallel.
pub fn run(cfg: &ScenarioConfig, opts: RunOptions) -> Result<RunReport> {
    cfg.validate()?;
    let gus = cfg.ground_users()?;
    let codebook = build_codebook(&cfg.array);
    info!(
        "running {} epochs x {} schemes over {} GUs",
        cfg.epochs.count,
        cfg.schemes.len(),
        gus.len()
    );
    let epochs: Vec<_> = (0..cfg.epochs.count)
        .into_par_iter()
        .map(|i| run_epoch(cfg, &gus, &codebook, i, opts))
        .collect::<Result<_>>()?;

    let mut coverage = Vec::new();
    let mut results = Vec::new();
    let mut runs = Vec::new();
    for (cov, pairs) in epochs {
        coverage.push(cov);
        for (r, s) in pairs {
            results.push(r);
            runs.push(s);
        }
    }
    let classes = density_classes(&gus, cfg.density_threshold);
    let summary = aggregate(&results, &classes);
    let gains = pairwise_gains(&summary);
    Ok(RunReport {
        provenance: Provenance {
            config_hash: config_hash(cfg)?,
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        config: cfg.clone(),
        options: opts,
        gus,
        classes,
        results,
        runs,
        coverage,
        summary,
        gains,
    })
}
