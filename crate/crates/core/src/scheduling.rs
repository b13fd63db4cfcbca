//! Satellite-to-GU link construction.
//!
//! The greedy scheduler grows a binary link matrix one link at a time, always
//! committing the candidate with the largest total-SE increment. Three
//! evaluation modes share the loop:
//!
//! - `Au`: increments scored with unit-power analog beams; the final beams are
//!   the analog beams with equal power split.
//! - `Shu`: same scoring as `Au`; one regularized-ZF pass on the finished
//!   link matrix.
//! - `Jhu`: every candidate is scored with the hybrid beams recomputed for the
//!   hypothetical link matrix.
//!
//! [`exhaustive_schedule`] enumerates the whole assignment space and is only
//! meant as a test oracle on tiny instances.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use log::{debug, trace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::{
    analog_power_scale, channel_matrix, columns, generalized_channel, hybrid_combine, regularized_zf, HybridMatrix,
    Regularization,
};
use crate::metrics::{self, BeamView};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeMode {
    Au,
    Shu,
    Jhu,
}

impl SchemeMode {
    pub const ALL: [SchemeMode; 3] = [SchemeMode::Au, SchemeMode::Shu, SchemeMode::Jhu];

    pub fn label(&self) -> &'static str {
        match self {
            SchemeMode::Au => "AU",
            SchemeMode::Shu => "SHU",
            SchemeMode::Jhu => "JHU",
        }
    }
}

impl fmt::Display for SchemeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "au" => Ok(SchemeMode::Au),
            "shu" => Ok(SchemeMode::Shu),
            "jhu" => Ok(SchemeMode::Jhu),
            other => Err(format!("unknown scheme `{other}` (expected au, shu or jhu)")),
        }
    }
}

/// Binary `N_s x N_u` link matrix. Rows are the active satellites in
/// ascending id order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinkMatrix {
    sat_ids: Vec<usize>,
    n_gus: usize,
    alpha: Vec<u8>,
}

impl LinkMatrix {
    pub fn new(sat_ids: Vec<usize>, n_gus: usize) -> Self {
        let alpha = vec![0; sat_ids.len() * n_gus];
        Self { sat_ids, n_gus, alpha }
    }

    pub fn sat_ids(&self) -> &[usize] {
        &self.sat_ids
    }

    pub fn n_gus(&self) -> usize {
        self.n_gus
    }

    fn row(&self, sat: usize) -> usize {
        self.sat_ids.binary_search(&sat).unwrap_or_else(|_| panic!("satellite {sat} not in link matrix"))
    }

    pub fn get(&self, sat: usize, gu: usize) -> u8 {
        self.alpha[self.row(sat) * self.n_gus + gu]
    }

    pub fn set(&mut self, sat: usize, gu: usize, value: bool) {
        let r = self.row(sat);
        self.alpha[r * self.n_gus + gu] = value as u8;
    }

    pub fn with_link(&self, sat: usize, gu: usize) -> Self {
        let mut next = self.clone();
        next.set(sat, gu, true);
        next
    }

    /// Raw entry by row index, for auditing.
    pub fn entry(&self, row: usize, gu: usize) -> u8 {
        self.alpha[row * self.n_gus + gu]
    }

    pub fn row_sum(&self, sat: usize) -> usize {
        let r = self.row(sat);
        self.alpha[r * self.n_gus..(r + 1) * self.n_gus].iter().map(|&a| a as usize).sum()
    }

    pub fn col_sum(&self, gu: usize) -> usize {
        (0..self.sat_ids.len()).map(|r| self.alpha[r * self.n_gus + gu] as usize).sum()
    }

    /// First satellite linked to `gu`.
    pub fn serving(&self, gu: usize) -> Option<usize> {
        (0..self.sat_ids.len())
            .find(|&r| self.alpha[r * self.n_gus + gu] == 1)
            .map(|r| self.sat_ids[r])
    }

    /// GUs served by `sat`, ascending.
    pub fn served(&self, sat: usize) -> Vec<usize> {
        let r = self.row(sat);
        (0..self.n_gus).filter(|&g| self.alpha[r * self.n_gus + g] == 1).collect()
    }

    pub fn link_count(&self) -> usize {
        self.alpha.iter().map(|&a| a as usize).sum()
    }

    pub fn unserved(&self) -> Vec<usize> {
        (0..self.n_gus).filter(|&g| self.col_sum(g) == 0).collect()
    }
}

/// Link parameters shared by every scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamParams {
    /// Maximum GUs per satellite (`N_b`).
    pub n_beams: usize,
    /// Per-satellite power budget in watts.
    pub tx_power: f64,
    pub regularization: Regularization,
    /// Per-beam power of the analog beams while scoring in `Au`/`Shu`.
    pub scoring_power: f64,
}

impl Default for BeamParams {
    fn default() -> Self {
        Self {
            n_beams: 32,
            tx_power: 80.0,
            regularization: Regularization::Optimal,
            scoring_power: 1.0,
        }
    }
}

/// Per-link data of one `(sat, gu)` pair with `sat` visible to `gu`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkData {
    /// Channel with the GU antenna on boresight, noise-normalized.
    pub channel: Vec<C64>,
    /// Unit-norm analog beam built from `channel`.
    pub analog: Vec<C64>,
    /// Amplitude factor `sqrt(G_vsat(off) / G_vsat(0))` of this link when the
    /// GU antenna points at the keyed serving satellite.
    pub vsat_amplitude: BTreeMap<usize, f64>,
}

/// One scheduling problem: visibility, channels and analog beams at a single
/// epoch.
#[derive(Debug, Clone)]
pub struct Snapshot {
    sat_ids: Vec<usize>,
    visible: Vec<Vec<usize>>,
    links: BTreeMap<(usize, usize), LinkData>,
    pub params: BeamParams,
}

impl Snapshot {
    /// `visible[g]` lists the satellites seen by GU `g`; every listed pair
    /// must have an entry in `links`.
    pub fn new(visible: Vec<Vec<usize>>, links: BTreeMap<(usize, usize), LinkData>, params: BeamParams) -> Result<Self> {
        let mut sat_ids: Vec<usize> = visible.iter().flatten().copied().collect();
        sat_ids.sort_unstable();
        sat_ids.dedup();
        let mut visible = visible;
        for (g, v) in visible.iter_mut().enumerate() {
            v.sort_unstable();
            v.dedup();
            for &s in v.iter() {
                let link = links
                    .get(&(s, g))
                    .ok_or_else(|| Error::Dimension(format!("missing link data for sat {s}, GU {g}")))?;
                if link.channel.len() != link.analog.len() {
                    return Err(Error::Dimension(format!("link ({s}, {g}) channel/beam length differ")));
                }
            }
        }
        Ok(Self {
            sat_ids,
            visible,
            links,
            params,
        })
    }

    pub fn sat_ids(&self) -> &[usize] {
        &self.sat_ids
    }

    pub fn n_gus(&self) -> usize {
        self.visible.len()
    }

    pub fn visible(&self, gu: usize) -> &[usize] {
        &self.visible[gu]
    }

    pub fn is_visible(&self, sat: usize, gu: usize) -> bool {
        self.visible[gu].binary_search(&sat).is_ok()
    }

    pub fn link(&self, sat: usize, gu: usize) -> Option<&LinkData> {
        self.links.get(&(sat, gu))
    }

    /// Amplitude factor of link `(sat, gu)` with the GU pointed at `serving`.
    pub fn vsat_amplitude(&self, sat: usize, gu: usize, serving: usize) -> f64 {
        if sat == serving {
            return 1.0;
        }
        self.links
            .get(&(sat, gu))
            .and_then(|l| l.vsat_amplitude.get(&serving).copied())
            .unwrap_or(1.0)
    }

    pub fn empty_links(&self) -> LinkMatrix {
        LinkMatrix::new(self.sat_ids.clone(), self.n_gus())
    }

    /// Product of per-GU options (visible satellites plus "unserved").
    pub fn assignment_space(&self) -> u128 {
        self.visible.iter().map(|v| v.len() as u128 + 1).product()
    }
}

/// Beams radiated by one satellite; column `j` serves `users[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SatBeams {
    pub users: Vec<usize>,
    pub hybrid: HybridMatrix,
}

impl SatBeams {
    pub fn beam(&self, gu: usize) -> Option<Vec<C64>> {
        self.users.iter().position(|&u| u == gu).map(|j| self.hybrid.column(j))
    }

    pub fn power(&self) -> f64 {
        self.hybrid.total_power()
    }
}

pub type BeamSet = BTreeMap<usize, SatBeams>;

fn analog_columns(snap: &Snapshot, sat: usize, users: &[usize]) -> Vec<Vec<C64>> {
    users.iter().map(|&g| snap.links[&(sat, g)].analog.clone()).collect()
}

/// Hybrid (analog + RZF) beams for `sat` serving `users`, scaled to `P_T`.
pub fn hybrid_beams(snap: &Snapshot, sat: usize, users: &[usize]) -> Result<SatBeams> {
    let analog = analog_columns(snap, sat, users);
    let chans: Vec<&[C64]> = users.iter().map(|&g| snap.links[&(sat, g)].channel.as_slice()).collect();
    let refs: Vec<&[C64]> = analog.iter().map(|c| c.as_slice()).collect();
    let f_a = columns(&refs);
    let h_tilde = generalized_channel(&channel_matrix(&chans), &f_a)?;
    let beta = snap.params.regularization.beta(users.len(), snap.params.tx_power, 1.0);
    let f_d = regularized_zf(&h_tilde, beta)?;
    Ok(SatBeams {
        users: users.to_vec(),
        hybrid: hybrid_combine(&f_a, &f_d, snap.params.tx_power)?,
    })
}

/// Analog beams with equal power split of `P_T`.
pub fn analog_scaled_beams(snap: &Snapshot, sat: usize, users: &[usize]) -> Result<SatBeams> {
    let analog = analog_columns(snap, sat, users);
    let refs: Vec<&[C64]> = analog.iter().map(|c| c.as_slice()).collect();
    Ok(SatBeams {
        users: users.to_vec(),
        hybrid: analog_power_scale(&columns(&refs), snap.params.tx_power)?,
    })
}

/// Analog beams at the fixed scoring power.
fn scoring_analog_beams(snap: &Snapshot, sat: usize, users: &[usize]) -> SatBeams {
    let analog = analog_columns(snap, sat, users);
    let refs: Vec<&[C64]> = analog.iter().map(|c| c.as_slice()).collect();
    let p = snap.params.scoring_power;
    SatBeams {
        users: users.to_vec(),
        hybrid: HybridMatrix {
            matrix: columns(&refs) * C64::new(p.sqrt(), 0.0),
            eta: p,
        },
    }
}

fn beams_for(links: &LinkMatrix, per_sat: impl Fn(usize, &[usize]) -> Result<SatBeams>) -> Result<BeamSet> {
    let mut set = BeamSet::new();
    for &s in links.sat_ids() {
        let users = links.served(s);
        if !users.is_empty() {
            set.insert(s, per_sat(s, &users)?);
        }
    }
    Ok(set)
}

/// Beams used while scoring increments under `mode`.
pub fn scoring_beams(snap: &Snapshot, links: &LinkMatrix, mode: SchemeMode) -> Result<BeamSet> {
    match mode {
        SchemeMode::Au | SchemeMode::Shu => beams_for(links, |s, u| Ok(scoring_analog_beams(snap, s, u))),
        SchemeMode::Jhu => beams_for(links, |s, u| hybrid_beams(snap, s, u)),
    }
}

/// Beams actually transmitted once the link matrix is fixed.
pub fn final_beams(snap: &Snapshot, links: &LinkMatrix, mode: SchemeMode) -> Result<BeamSet> {
    match mode {
        SchemeMode::Au => beams_for(links, |s, u| analog_scaled_beams(snap, s, u)),
        SchemeMode::Shu | SchemeMode::Jhu => beams_for(links, |s, u| hybrid_beams(snap, s, u)),
    }
}

/// Total spectral efficiency of `links` transmitted with `beams`.
pub fn total_se(snap: &Snapshot, links: &LinkMatrix, beams: &BeamSet) -> f64 {
    metrics::total_se_view(snap, links, beams.into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerState {
    /// Satellites still believed to have spare capacity.
    pub candidates: Vec<usize>,
    /// Unserved GUs.
    pub pending: Vec<usize>,
}

impl SchedulerState {
    pub fn fresh(snap: &Snapshot) -> Self {
        Self {
            candidates: snap.sat_ids().to_vec(),
            pending: (0..snap.n_gus()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.pending.len()
    }
}

/// Links every GU that sees exactly one satellite, as long as that
/// satellite has a free beam.
pub fn preassign_single_visibility(snap: &Snapshot, state: &mut SchedulerState, links: &mut LinkMatrix) {
    let n_b = snap.params.n_beams;
    state.pending.retain(|&g| match snap.visible(g) {
        [only] if links.row_sum(*only) < n_b => {
            links.set(*only, g, true);
            false
        }
        _ => true,
    });
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub candidates: usize,
    pub sat: usize,
    pub gu: usize,
    pub delta_se: f64,
    pub committed: bool,
}

#[derive(Debug, Clone)]
pub struct ScheduleOutcome {
    pub mode: SchemeMode,
    pub links: LinkMatrix,
    pub beams: BeamSet,
    pub total_se: f64,
    pub unserved: Vec<usize>,
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
}

/// Beams of `sat` once `gu` joins its served set.
fn candidate_sat_beams(snap: &Snapshot, links: &LinkMatrix, sat: usize, gu: usize, mode: SchemeMode) -> Result<SatBeams> {
    let mut users = links.served(sat);
    let pos = users.partition_point(|&u| u < gu);
    users.insert(pos, gu);
    match mode {
        SchemeMode::Au | SchemeMode::Shu => Ok(scoring_analog_beams(snap, sat, &users)),
        SchemeMode::Jhu => hybrid_beams(snap, sat, &users),
    }
}

/// Greedy link construction under `mode`. Ties in the increment go to the
/// lexicographically smallest `(sat, gu)`.
pub fn greedy_schedule(snap: &Snapshot, mode: SchemeMode) -> Result<ScheduleOutcome> {
    let mut state = SchedulerState::fresh(snap);
    let mut links = snap.empty_links();
    preassign_single_visibility(snap, &mut state, &mut links);

    let mut trace = Vec::new();
    let mut iterations = 0;
    while state.n() > 0 {
        let current = scoring_beams(snap, &links, mode)?;
        let base = total_se(snap, &links, &current);

        let pairs: Vec<(usize, usize)> = state
            .candidates
            .iter()
            .flat_map(|&s| state.pending.iter().filter(move |&&g| snap.is_visible(s, g)).map(move |&g| (s, g)))
            .collect();
        if pairs.is_empty() {
            debug!("{mode}: {} GUs left without a candidate satellite", state.n());
            break;
        }

        let scores: Vec<Result<f64>> = pairs
            .par_iter()
            .map(|&(s, g)| {
                let next = links.with_link(s, g);
                let updated = candidate_sat_beams(snap, &links, s, g, mode)?;
                let view = BeamView {
                    base: &current,
                    replace: Some((s, &updated)),
                };
                Ok(metrics::total_se_view(snap, &next, view) - base)
            })
            .collect();

        let mut best: Option<(usize, usize, f64)> = None;
        for (&(s, g), score) in pairs.iter().zip(scores) {
            let delta = score?;
            if best.is_none_or(|(_, _, b)| delta > b) {
                best = Some((s, g, delta));
            }
        }
        let (s, g, delta) = best.expect("non-empty candidate list");

        let committed = links.row_sum(s) < snap.params.n_beams;
        if committed {
            links.set(s, g, true);
            state.pending.retain(|&u| u != g);
        } else {
            state.candidates.retain(|&c| c != s);
        }
        trace!("{mode} iter {iterations}: ({s}, {g}) dR={delta:.6} committed={committed}");
        trace.push(TraceRecord {
            iteration: iterations,
            candidates: pairs.len(),
            sat: s,
            gu: g,
            delta_se: delta,
            committed,
        });
        iterations += 1;
    }

    let beams = final_beams(snap, &links, mode)?;
    let total = total_se(snap, &links, &beams);
    Ok(ScheduleOutcome {
        mode,
        unserved: links.unserved(),
        links,
        beams,
        total_se: total,
        iterations,
        trace,
    })
}

/// Assignments scanned by [`exhaustive_schedule`] at most.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone)]
pub struct ExhaustiveOutcome {
    pub links: LinkMatrix,
    pub total_se: f64,
    pub served: usize,
    pub evaluated: usize,
}

/// Best assignment under `mode`'s final beamforming. Among beam-count-feasible
/// assignments (each GU linked to at most one visible satellite) the
/// search maximizes first the number of served GUs, then total SE.
pub fn exhaustive_schedule(snap: &Snapshot, mode: SchemeMode) -> Result<ExhaustiveOutcome> {
    let size = snap.assignment_space();
    if size > EXHAUSTIVE_LIMIT {
        return Err(Error::SearchSpaceTooLarge {
            size,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let n_gus = snap.n_gus();
    // choice[g] == 0 means unserved, otherwise visible[g][choice - 1]
    let mut choice = vec![0usize; n_gus];
    let mut best: Option<ExhaustiveOutcome> = None;
    let mut evaluated = 0;
    loop {
        let mut links = snap.empty_links();
        let mut feasible = true;
        for (g, &c) in choice.iter().enumerate() {
            if c > 0 {
                let s = snap.visible(g)[c - 1];
                if links.row_sum(s) >= snap.params.n_beams {
                    feasible = false;
                    break;
                }
                links.set(s, g, true);
            }
        }
        if feasible {
            let served = links.link_count();
            if best.as_ref().is_none_or(|b| served >= b.served) {
                let beams = final_beams(snap, &links, mode)?;
                let se = total_se(snap, &links, &beams);
                evaluated += 1;
                let better = match &best {
                    None => true,
                    Some(b) => served > b.served || se > b.total_se,
                };
                if better {
                    best = Some(ExhaustiveOutcome {
                        links,
                        total_se: se,
                        served,
                        evaluated: 0,
                    });
                }
            }
        }
        // odometer increment
        let mut g = 0;
        loop {
            if g == n_gus {
                let mut out = best.expect("the empty assignment is always feasible");
                out.evaluated = evaluated;
                return Ok(out);
            }
            choice[g] += 1;
            if choice[g] <= snap.visible(g).len() {
                break;
            }
            choice[g] = 0;
            g += 1;
        }
    }
}

/// Constraint violations of a link matrix (beam count, single
/// association, binary entries, visibility).
pub fn audit(snap: &Snapshot, links: &LinkMatrix) -> Vec<String> {
    let mut issues = Vec::new();
    for (r, &s) in links.sat_ids().iter().enumerate() {
        let mut row = 0;
        for g in 0..links.n_gus() {
            let a = links.entry(r, g);
            if a > 1 {
                issues.push(format!("alpha[{s},{g}] = {a} is not binary"));
            }
            if a == 1 && !snap.is_visible(s, g) {
                issues.push(format!("sat {s} linked to GU {g} without visibility"));
            }
            row += a as usize;
        }
        if row > snap.params.n_beams {
            issues.push(format!("sat {s} serves {row} GUs > N_b = {}", snap.params.n_beams));
        }
    }
    for g in 0..links.n_gus() {
        let c = links.col_sum(g);
        if c > 1 {
            issues.push(format!("GU {g} linked to {c} satellites"));
        }
    }
    issues
}

/// Random small instance for tests and oracle comparisons: satellites with
/// their GUs clustered in angle so intra-satellite interference matters.
pub mod synthetic {
    use super::*;
    use crate::beamforming::{analog_beamform, build_codebook};
    use crate::channel::{steering_vector, ArrayConfig};
    use crate::rng::SimRng;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};

    #[derive(Debug, Clone)]
    pub struct InstanceSpec {
        pub n_sats: usize,
        pub n_gus: usize,
        pub array: ArrayConfig,
        pub codewords: usize,
        pub params: BeamParams,
    }

    impl Default for InstanceSpec {
        fn default() -> Self {
            Self {
                n_sats: 3,
                n_gus: 5,
                array: ArrayConfig {
                    n_x: 4,
                    n_y: 4,
                    ..ArrayConfig::default()
                },
                codewords: 4,
                params: BeamParams {
                    n_beams: 2,
                    ..BeamParams::default()
                },
            }
        }
    }

    pub fn instance(spec: &InstanceSpec, seed: u64) -> Snapshot {
        let mut rng = SimRng::seed_from_u64(seed);
        let cb = build_codebook(&spec.array);
        // GU ground positions on a line; each satellite sees a window of them
        let mut visible = vec![Vec::new(); spec.n_gus];
        for g in 0..spec.n_gus {
            let k = rng.random_range(1..=spec.n_sats.min(3));
            for s in sample(&mut rng, spec.n_sats, k).into_iter() {
                visible[g].push(s);
            }
        }
        let mut links = BTreeMap::new();
        for (g, vis) in visible.iter().enumerate() {
            for &s in vis {
                let phi = rng.random_range(-180.0..180.0);
                let theta = rng.random_range(55.0..90.0);
                let snr_db: f64 = rng.random_range(-6.0..4.0);
                let amp = 10f64.powf(snr_db / 20.0);
                let channel: Vec<C64> = steering_vector(phi, theta, &spec.array).into_iter().map(|z| z * amp).collect();
                let analog = analog_beamform(&channel, &cb, spec.codewords).expect("valid instance").entries;
                let vsat_amplitude = vis
                    .iter()
                    .filter(|&&o| o != s)
                    .map(|&o| (o, 10f64.powf(rng.random_range(-30.0..-3.0) / 20.0)))
                    .collect();
                links.insert(
                    (s, g),
                    LinkData {
                        channel,
                        analog,
                        vsat_amplitude,
                    },
                );
            }
        }
        Snapshot::new(visible, links, spec.params.clone()).expect("consistent synthetic instance")
    }
}
