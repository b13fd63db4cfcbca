//! Result files. Nothing time-dependent is written, so identical runs give
//! identical bytes.
//!
//! | file | content |
//! |------|---------|
//! | `results.{csv,json}` | one record per epoch x scheme x GU |
//! | `total_se.{csv,json}` | total SE per epoch and scheme |
//! | `user_se.{csv,json}` | per-epoch SE of the highlighted GUs |
//! | `links.{csv,json}` | every committed `(sat, gu)` link |
//! | `trace.{csv,json}` | greedy iterations, only when the run kept traces |
//! | `summary.txt` | human-readable summary table |
//! | `report.json` | summary, gains, coverage and provenance |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::oracle::OracleRecord;
use super::run::{EpochCoverage, PairGain, Provenance, RunReport};
use crate::channel::linear_to_db;
use crate::metrics::{Density, Summary};
use crate::scheduling::SchemeMode;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// Row of `results.*`. Unserved GUs have empty `serving_sat` and `sinr_db`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub epoch: usize,
    pub scheme: SchemeMode,
    pub gu_id: usize,
    pub serving_sat: Option<usize>,
    pub sinr_db: Option<f64>,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TotalRow {
    pub epoch: usize,
    pub time_s: f64,
    pub scheme: SchemeMode,
    pub total_se: f64,
    pub unserved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserRow {
    pub epoch: usize,
    pub scheme: SchemeMode,
    pub gu_id: usize,
    pub label: String,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkRow {
    pub epoch: usize,
    pub scheme: SchemeMode,
    pub sat: usize,
    pub gu: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub scheme: SchemeMode,
    pub iteration: usize,
    pub candidates: usize,
    pub sat: usize,
    pub gu: usize,
    pub delta_se: f64,
    pub committed: bool,
}

pub fn result_rows(report: &RunReport) -> Vec<ResultRow> {
    report
        .results
        .iter()
        .flat_map(|r| {
            r.users.iter().map(move |u| ResultRow {
                epoch: r.epoch_index,
                scheme: r.scheme,
                gu_id: u.gu_id,
                serving_sat: u.serving_sat,
                sinr_db: u.serving_sat.map(|_| linear_to_db(u.sinr)),
                se: u.se,
            })
        })
        .collect()
}

pub fn total_rows(report: &RunReport) -> Vec<TotalRow> {
    report
        .results
        .iter()
        .map(|r| TotalRow {
            epoch: r.epoch_index,
            time_s: r.epoch,
            scheme: r.scheme,
            total_se: r.total_se,
            unserved: r.unserved.len(),
        })
        .collect()
}

pub fn user_rows(report: &RunReport) -> Vec<UserRow> {
    let named: Vec<_> = report
        .config
        .highlight
        .iter()
        .filter_map(|l| report.gus.iter().find(|g| &g.label == l))
        .collect();
    report
        .results
        .iter()
        .flat_map(|r| {
            named.iter().map(move |g| UserRow {
                epoch: r.epoch_index,
                scheme: r.scheme,
                gu_id: g.user_id,
                label: g.label.clone(),
                se: r.users[g.user_id].se,
            })
        })
        .collect()
}

pub fn link_rows(report: &RunReport) -> Vec<LinkRow> {
    report
        .runs
        .iter()
        .flat_map(|run| {
            (0..run.links.n_gus()).filter_map(move |g| {
                run.links.serving(g).map(|s| LinkRow {
                    epoch: run.epoch_index,
                    scheme: run.scheme,
                    sat: s,
                    gu: g,
                })
            })
        })
        .collect()
}

pub fn trace_rows(report: &RunReport) -> Vec<TraceRow> {
    report
        .runs
        .iter()
        .flat_map(|run| {
            run.trace.iter().map(move |t| TraceRow {
                epoch: run.epoch_index,
                scheme: run.scheme,
                iteration: t.iteration,
                candidates: t.candidates,
                sat: t.sat,
                gu: t.gu,
                delta_se: t.delta_se,
                committed: t.committed,
            })
        })
        .collect()
}

/// `(A - B) / B` table, per-density statistics and coverage in plain text.
pub fn summary_text(report: &RunReport) -> String {
    let mut s = String::new();
    let p = &report.provenance;
    let _ = writeln!(s, "satcoop {}  seed {}  config {}", p.version, p.seed, &p.config_hash[..16]);
    let _ = writeln!(
        s,
        "{} GUs, {} epochs, {} satellites\n",
        report.gus.len(),
        report.coverage.len(),
        report.config.constellation.total()
    );
    let _ = writeln!(s, "{:<8}{:>16}", "scheme", "mean total SE");
    for (scheme, v) in &report.summary.mean_total_se {
        let _ = writeln!(s, "{:<8}{:>16.4}", scheme.label(), v);
    }
    if !report.gains.is_empty() {
        let _ = writeln!(s);
        for g in &report.gains {
            let _ = writeln!(s, "{} vs {}: {:+.2}%", g.scheme.label(), g.baseline.label(), 100.0 * g.gain);
        }
    }
    let _ = writeln!(s, "\n{:<8}{:<8}{:>6}{:>12}{:>12}", "scheme", "class", "n", "mean SE", "var SE");
    for (scheme, by) in &report.summary.user_se {
        for (class, st) in by {
            let c = match class {
                Density::Dense => "dense",
                Density::Sparse => "sparse",
            };
            let _ = writeln!(
                s,
                "{:<8}{:<8}{:>6}{:>12.4}{:>12.4}",
                scheme.label(),
                c,
                st.count,
                st.mean,
                st.variance
            );
        }
    }
    let min_vis = report.coverage.iter().flat_map(|c| c.visible_counts.iter()).min().copied().unwrap_or(0);
    let uncovered: usize = report.coverage.iter().map(|c| c.uncovered.len()).sum();
    let _ = writeln!(s, "\nmin visible satellites per GU: {min_vis}; uncovered GU-epochs: {uncovered}");
    s
}

#[derive(Serialize)]
struct ReportJson<'a> {
    provenance: &'a Provenance,
    summary: &'a Summary,
    gains: &'a [PairGain],
    coverage: &'a [EpochCoverage],
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn encode<T: Serialize>(rows: &[T], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| Error::Serialize(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Error::Serialize(e.to_string()))
        }
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(rows).map_err(|e| Error::Serialize(e.to_string()))?;
            v.push(b'\n');
            Ok(v)
        }
    }
}

/// CSV header for rows of type `T` even when `rows` is empty.
fn encode_with_header<T: Serialize>(rows: &[T], format: Format, header: &[&str]) -> Result<Vec<u8>> {
    if rows.is_empty() && format == Format::Csv {
        let mut v = header.join(",").into_bytes();
        v.push(b'\n');
        return Ok(v);
    }
    encode(rows, format)
}

/// Writes every result file into `dir` (created if missing) and returns the
/// paths written.
pub fn emit(report: &RunReport, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let ext = format.extension();
    let mut written = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        write_file(&path, &bytes)?;
        written.push(path);
        Ok(())
    };
    put(
        format!("results.{ext}"),
        encode_with_header(
            &result_rows(report),
            format,
            &["epoch", "scheme", "gu_id", "serving_sat", "sinr_db", "se"],
        )?,
    )?;
    put(
        format!("total_se.{ext}"),
        encode_with_header(
            &total_rows(report),
            format,
            &["epoch", "time_s", "scheme", "total_se", "unserved"],
        )?,
    )?;
    put(
        format!("user_se.{ext}"),
        encode_with_header(&user_rows(report), format, &["epoch", "scheme", "gu_id", "label", "se"])?,
    )?;
    put(
        format!("links.{ext}"),
        encode_with_header(&link_rows(report), format, &["epoch", "scheme", "sat", "gu"])?,
    )?;
    if report.options.trace {
        put(
            format!("trace.{ext}"),
            encode_with_header(
                &trace_rows(report),
                format,
                &["epoch", "scheme", "iteration", "candidates", "sat", "gu", "delta_se", "committed"],
            )?,
        )?;
    }
    put("summary.txt".into(), summary_text(report).into_bytes())?;
    let json = ReportJson {
        provenance: &report.provenance,
        summary: &report.summary,
        gains: &report.gains,
        coverage: &report.coverage,
    };
    let mut bytes = serde_json::to_vec_pretty(&json).map_err(|e| Error::Serialize(e.to_string()))?;
    bytes.push(b'\n');
    put("report.json".into(), bytes)?;
    Ok(written)
}

/// Oracle comparison as a plain-text table plus the ratio distribution.
pub fn oracle_text(records: &[OracleRecord]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>4}{:>6}{:>7}{:>6}{:>6}{:>12}{:>12}{:>8}{:>8}",
        "inst", "epoch", "scheme", "sats", "gus", "greedy", "optimal", "ratio", "evals"
    );
    for r in records {
        let _ = writeln!(
            s,
            "{:>4}{:>6}{:>7}{:>6}{:>6}{:>12.4}{:>12.4}{:>8.4}{:>8}",
            r.instance,
            r.epoch_index,
            r.scheme.label(),
            r.sats.len(),
            r.gus.len(),
            r.greedy_se,
            r.optimal_se,
            r.ratio(),
            r.evaluated
        );
    }
    for scheme in SchemeMode::ALL {
        let mut ratios: Vec<f64> = records.iter().filter(|r| r.scheme == scheme).map(|r| r.ratio()).collect();
        if ratios.is_empty() {
            continue;
        }
        ratios.sort_by(f64::total_cmp);
        let n = ratios.len();
        let within = ratios.iter().filter(|&&x| x >= 0.9).count();
        let _ = writeln!(
            s,
            "{}: min {:.4}  median {:.4}  max {:.4}  >=0.9 in {}/{}",
            scheme.label(),
            ratios[0],
            ratios[n / 2],
            ratios[n - 1],
            within,
            n
        );
    }
    s
}
