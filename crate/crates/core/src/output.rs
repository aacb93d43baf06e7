//! Run artifacts: CSV tables, summary and comparison JSON.
//!
//! Every float is printed with six decimals so identical runs produce
//! identical bytes. Files are written to a temporary name in the target
//! directory and renamed into place.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::value::RawValue;

use crate::engine::{DistanceRecord, EventKind, SimulationResult};
use crate::error::{Error, Result};

pub const TRAJECTORIES_CSV: &str = "trajectories.csv";
pub const DISTANCES_CSV: &str = "distances.csv";
pub const EVENTS_CSV: &str = "events.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const COMPARISON_JSON: &str = "comparison.json";

/// Six-decimal rendering; negative zero prints as zero.
pub fn fixed(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn raw(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() {
        fixed(x)
    } else {
        "null".to_string()
    };
    RawValue::from_string(text).expect("fixed-point numbers are valid JSON")
}

fn raw_opt(x: Option<f64>) -> Option<Box<RawValue>> {
    x.map(raw)
}

/// Percentile of sorted samples with linear interpolation between closest
/// ranks; `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        }
    }
}

/// Distance statistics of one follower/leader pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStats {
    pub follower_id: u32,
    pub leader_id: u32,
    pub samples: usize,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
}

/// Statistics per (follower, leader) pair, ordered by follower then leader.
pub fn pair_statistics(records: &[DistanceRecord]) -> Vec<PairStats> {
    let mut groups: BTreeMap<(u32, u32), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.follower_id, r.leader_id))
            .or_default()
            .push(r.distance);
    }
    groups
        .into_iter()
        .map(|((follower_id, leader_id), mut d)| {
            d.sort_by(f64::total_cmp);
            PairStats {
                follower_id,
                leader_id,
                samples: d.len(),
                min: d[0],
                max: d[d.len() - 1],
                median: percentile(&d, 0.5),
                p25: percentile(&d, 0.25),
                p75: percentile(&d, 0.75),
            }
        })
        .collect()
}

#[derive(Serialize)]
struct PairJson {
    follower_id: u32,
    leader_id: u32,
    samples: usize,
    min: Box<RawValue>,
    max: Box<RawValue>,
    median: Box<RawValue>,
    p25: Box<RawValue>,
    p75: Box<RawValue>,
}

#[derive(Serialize)]
struct SummaryJson {
    mode: &'static str,
    completed: bool,
    reformation_time: Option<Box<RawValue>>,
    mission_time: Option<Box<RawValue>>,
    end_time: Box<RawValue>,
    pairs: Vec<PairJson>,
}

pub fn trajectories_csv(result: &SimulationResult) -> String {
    let mut out = String::from("tick,time,agent_id,x,y,heading\n");
    for f in &result.trajectory {
        for a in &f.agents {
            let p = a.pose.position;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                f.tick,
                fixed(f.time),
                a.id,
                fixed(p.x),
                fixed(p.y),
                fixed(a.pose.heading)
            );
        }
    }
    out
}

pub fn distances_csv(result: &SimulationResult) -> String {
    let mut out = String::from("time,follower_id,leader_id,distance\n");
    for r in &result.distances {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fixed(r.time),
            r.follower_id,
            r.leader_id,
            fixed(r.distance)
        );
    }
    out
}

pub fn events_csv(result: &SimulationResult) -> String {
    let mut out = String::from("time,kind,agent_id\n");
    for e in &result.events {
        let _ = writeln!(out, "{},{},{}", fixed(e.time), e.kind.as_str(), e.agent_id);
    }
    out
}

pub fn summary_json(result: &SimulationResult) -> String {
    let pairs = pair_statistics(&result.distances)
        .into_iter()
        .map(|s| PairJson {
            follower_id: s.follower_id,
            leader_id: s.leader_id,
            samples: s.samples,
            min: raw(s.min),
            max: raw(s.max),
            median: raw(s.median),
            p25: raw(s.p25),
            p75: raw(s.p75),
        })
        .collect();
    let summary = SummaryJson {
        mode: result.mode.as_str(),
        completed: result.completed,
        reformation_time: raw_opt(result.reformation_time()),
        mission_time: raw_opt(result.mission_time()),
        end_time: raw(result.end_time),
        pairs,
    };
    to_json(&summary)
}

#[derive(Serialize)]
struct ModeJson {
    completed: bool,
    passage_complete_time: Option<Box<RawValue>>,
    reformation_time: Option<Box<RawValue>>,
    mission_time: Option<Box<RawValue>>,
}

#[derive(Serialize)]
struct ComparisonJson {
    dfrpsr: ModeJson,
    baseline: ModeJson,
    /// Baseline minus DFRPSR reformation time.
    reformation_time_difference: Option<Box<RawValue>>,
}

fn mode_json(r: &SimulationResult) -> ModeJson {
    ModeJson {
        completed: r.completed,
        passage_complete_time: raw_opt(r.event_time(EventKind::PassageComplete)),
        reformation_time: raw_opt(r.reformation_time()),
        mission_time: raw_opt(r.mission_time()),
    }
}

/// Baseline reformation time minus the DFRPSR one, when both restored.
pub fn reformation_difference(
    dfrpsr: &SimulationResult,
    baseline: &SimulationResult,
) -> Option<f64> {
    Some(baseline.reformation_time()? - dfrpsr.reformation_time()?)
}

pub fn comparison_json(dfrpsr: &SimulationResult, baseline: &SimulationResult) -> String {
    to_json(&ComparisonJson {
        dfrpsr: mode_json(dfrpsr),
        baseline: mode_json(baseline),
        reformation_time_difference: raw_opt(reformation_difference(dfrpsr, baseline)),
    })
}

fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output structs serialize");
    s.push('\n');
    s
}

/// Writes `contents` to `dir/name` through a temporary file in `dir`.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, &target).map_err(|e| Error::io(&target, e))?;
    Ok(target)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes the four per-run files into `out_dir`, creating it if needed.
pub fn write_outputs(result: &SimulationResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out_dir)?;
    Ok(vec![
        write_atomic(out_dir, TRAJECTORIES_CSV, &trajectories_csv(result))?,
        write_atomic(out_dir, DISTANCES_CSV, &distances_csv(result))?,
        write_atomic(out_dir, EVENTS_CSV, &events_csv(result))?,
        write_atomic(out_dir, SUMMARY_JSON, &summary_json(result))?,
    ])
}

/// Writes each run into its own subdirectory and `comparison.json` on top.
pub fn write_comparison(
    dfrpsr: &SimulationResult,
    baseline: &SimulationResult,
    out_dir: &Path,
) -> Result<PathBuf> {
    write_outputs(dfrpsr, &out_dir.join("dfrpsr"))?;
    write_outputs(baseline, &out_dir.join("baseline"))?;
    write_atomic(out_dir, COMPARISON_JSON, &comparison_json(dfrpsr, baseline))
}
