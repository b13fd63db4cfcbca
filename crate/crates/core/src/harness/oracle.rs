//! Greedy-vs-exhaustive comparison on small sub-instances cut from the
//! configured scenario.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use serde::Serialize;

use super::config::ScenarioConfig;
use super::run::build_epoch;
use crate::beamforming::build_codebook;
use crate::rng::{oracle_stream, substream};
use crate::scheduling::{audit, exhaustive_schedule, greedy_schedule, BeamParams, LinkMatrix, SchemeMode, Snapshot};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRecord {
    pub instance: usize,
    pub epoch_index: usize,
    pub scheme: SchemeMode,
    pub sats: Vec<usize>,
    /// GU ids in the full scenario.
    pub gus: Vec<usize>,
    pub greedy_se: f64,
    pub optimal_se: f64,
    pub greedy_served: usize,
    pub optimal_served: usize,
    pub evaluated: usize,
    /// Constraint violations of the greedy link matrix.
    pub violations: Vec<String>,
    /// Greedy links, GU columns in the order of `gus`.
    #[serde(skip)]
    pub links: LinkMatrix,
}

impl OracleRecord {
    /// Greedy over optimal total SE; 1 when both are zero.
    pub fn ratio(&self) -> f64 {
        if self.optimal_se == 0.0 {
            if self.greedy_se == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.greedy_se / self.optimal_se
        }
    }
}

/// Restricts `snap` to satellites `sats` and GUs `gus`, renumbering GUs to
/// `0..gus.len()`. Satellite ids are kept.
pub fn sub_snapshot(snap: &Snapshot, sats: &[usize], gus: &[usize], params: BeamParams) -> Result<Snapshot> {
    let mut visible = Vec::with_capacity(gus.len());
    let mut links = BTreeMap::new();
    for (local, &g) in gus.iter().enumerate() {
        let v: Vec<usize> = snap.visible(g).iter().copied().filter(|s| sats.contains(s)).collect();
        for &s in &v {
            let mut data = snap.link(s, g).expect("visible link").clone();
            data.vsat_amplitude.retain(|o, _| sats.contains(o));
            links.insert((s, local), data);
        }
        visible.push(v);
    }
    Snapshot::new(visible, links, params)
}

/// Draws `cfg.oracle.instances` sub-instances and solves each under every
/// configured scheme. Instance `i` uses epoch `i % epochs.count`, a random
/// anchor GU and up to `max_sats` of the satellites it sees, then up to
/// `max_gus` GUs that see at least one of them.
pub fn run_oracle(cfg: &ScenarioConfig) -> Result<Vec<OracleRecord>> {
    cfg.validate()?;
    let gus = cfg.ground_users()?;
    let codebook = build_codebook(&cfg.array);
    let params = BeamParams {
        n_beams: cfg.oracle.n_beams,
        ..cfg.beam_params()
    };
    let mut epochs = BTreeMap::new();
    let mut out = Vec::new();
    for i in 0..cfg.oracle.instances {
        let e = i % cfg.epochs.count;
        if let Entry::Vacant(slot) = epochs.entry(e) {
            slot.insert(build_epoch(cfg, &gus, &codebook, e)?);
        }
        let full = &epochs[&e].snapshot;
        let mut rng = substream(cfg.seed, oracle_stream(i));
        let covered: Vec<usize> = (0..gus.len()).filter(|&g| !full.visible(g).is_empty()).collect();
        let Some(&anchor) = covered.choose(&mut rng) else {
            continue;
        };
        let mut sats = full.visible(anchor).to_vec();
        sats.shuffle(&mut rng);
        sats.truncate(cfg.oracle.max_sats.max(1));
        sats.sort_unstable();
        let mut pool: Vec<usize> = covered
            .iter()
            .copied()
            .filter(|&g| g != anchor && full.visible(g).iter().any(|s| sats.contains(s)))
            .collect();
        pool.shuffle(&mut rng);
        let mut members = vec![anchor];
        members.extend(pool.into_iter().take(cfg.oracle.max_gus.saturating_sub(1)));
        members.sort_unstable();

        let sub = sub_snapshot(full, &sats, &members, params.clone())?;
        for &scheme in &cfg.schemes {
            let greedy = greedy_schedule(&sub, scheme)?;
            let best = exhaustive_schedule(&sub, scheme)?;
            out.push(OracleRecord {
                instance: i,
                epoch_index: e,
                scheme,
                sats: sats.clone(),
                gus: members.clone(),
                greedy_se: greedy.total_se,
                optimal_se: best.total_se,
                greedy_served: greedy.links.link_count(),
                optimal_served: best.served,
                evaluated: best.evaluated,
                violations: audit(&sub, &greedy.links),
                links: greedy.links,
            });
        }
    }
    Ok(out)
}
