//! Grid sweeps over segmenter and agent parameters on a scenario.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, Smoothing};
use crate::events::replay_log;
use crate::fixtures::Scenario;
use crate::pipeline::run_pipeline;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub mud_ms: Vec<u64>,
    pub vpt: Vec<f64>,
    pub msd_ms: Vec<u64>,
    pub mcs: Vec<usize>,
}

impl SweepGrid {
    /// Every combination, varying MCS fastest.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &mud_ms in &self.mud_ms {
            for &vpt in &self.vpt {
                for &msd_ms in &self.msd_ms {
                    for &mcs in &self.mcs {
                        out.push(SweepPoint { mud_ms, vpt, msd_ms, mcs });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub mud_ms: u64,
    pub vpt: f64,
    pub msd_ms: u64,
    pub mcs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(flatten)]
    pub point: SweepPoint,
    pub bleu: Option<f64>,
    pub stream_laal_ms: Option<f64>,
    pub within_regime: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Runs the scenario at one grid point. Failures are recorded in the row.
pub fn run_point(scenario: &Scenario, point: SweepPoint) -> SweepRow {
    let mut config = scenario.config;
    config.segmenter.max_unvoiced_duration_ms = point.mud_ms;
    config.segmenter.voice_prob_threshold = point.vpt;
    config.segmenter.max_segment_duration_ms = point.msd_ms;
    config.agent.min_chunk_size_words = point.mcs;

    let result = run_pipeline(&scenario.timeline, &config, &mut scenario.engines())
        .map_err(|e| e.to_string())
        .and_then(|events| replay_log(&events).map_err(|e| e.to_string()))
        .and_then(|log| log.with_references(&scenario.references).map_err(|e| e.to_string()))
        .and_then(|log| evaluate(&log, scenario.manifest.unit, Smoothing::None).map_err(|e| e.to_string()));
    match result {
        Ok(report) => SweepRow {
            point,
            bleu: Some(report.bleu),
            stream_laal_ms: Some(report.stream_laal_ms),
            within_regime: config.regime.admits(report.stream_laal_ms),
            error: None,
        },
        Err(e) => {
            log::warn!("sweep point {point:?} failed: {e}");
            SweepRow { point, bleu: None, stream_laal_ms: None, within_regime: false, error: Some(e) }
        }
    }
}

/// Runs every grid point on up to `jobs` threads; rows come back in grid order.
pub fn sweep(scenario: &Scenario, grid: &SweepGrid, jobs: usize) -> Vec<SweepRow> {
    let points = grid.points();
    if jobs <= 1 {
        return points.into_iter().map(|p| run_point(scenario, p)).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| points.into_par_iter().map(|p| run_point(scenario, p)).collect()),
        Err(e) => {
            log::warn!("could not start {jobs} sweep threads ({e}); running sequentially");
            points.into_iter().map(|p| run_point(scenario, p)).collect()
        }
    }
}

pub fn format_table(rows: &[SweepRow]) -> String {
    let mut out = String::from("mud_ms   vpt  msd_ms  mcs    bleu  stream_laal_ms  regime\n");
    let num = |v: Option<f64>, width: usize| v.map_or(format!("{:>width$}", "-"), |v| format!("{v:>width$.2}"));
    for r in rows {
        let p = r.point;
        let regime = match (&r.error, r.within_regime) {
            (Some(e), _) => format!("error: {e}"),
            (None, true) => "ok".into(),
            (None, false) => "over".into(),
        };
        writeln!(
            out,
            "{:>6} {:>5.2} {:>7} {:>4} {} {}  {regime}",
            p.mud_ms,
            p.vpt,
            p.msd_ms,
            p.mcs,
            num(r.bleu, 7),
            num(r.stream_laal_ms, 15)
        )
        .expect("writing to a string");
    }
    out
}

pub fn rows_to_jsonl(rows: &[SweepRow]) -> String {
    rows.iter().map(|r| serde_json::to_string(r).expect("rows serialize") + "\n").collect()
}
