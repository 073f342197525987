//! Replays a scripted hypothesis trace through the stabilizer.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{HypWord, Stabilizer, StabilizerConfig};
use crate::events::{EventKind, PipelineEvent, StableCommit};

/// One scripted hypothesis. `final` closes the current segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEntry {
    pub interval_end_ms: u64,
    pub words: Vec<String>,
    /// Per-word end times; every word ends at `interval_end_ms` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_ends_ms: Option<Vec<u64>>,
    #[serde(default, rename = "final")]
    pub is_final: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: interval end {got} ms precedes {prev} ms")]
    Order { line: usize, prev: u64, got: u64 },
    #[error("line {line}: {words} words but {ends} end times")]
    EndCount { line: usize, words: usize, ends: usize },
}

impl TraceEntry {
    pub fn hypothesis(&self) -> Vec<HypWord> {
        match &self.word_ends_ms {
            Some(ends) => self.words.iter().zip(ends).map(|(w, &e)| HypWord::new(w.clone(), e)).collect(),
            None => self.words.iter().map(|w| HypWord::new(w.clone(), self.interval_end_ms)).collect(),
        }
    }
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceEntry>, TraceError> {
    let mut out: Vec<TraceEntry> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: TraceEntry =
            serde_json::from_str(line).map_err(|e| TraceError::Schema { line: i + 1, message: e.to_string() })?;
        if let Some(ends) = &entry.word_ends_ms {
            if ends.len() != entry.words.len() {
                return Err(TraceError::EndCount { line: i + 1, words: entry.words.len(), ends: ends.len() });
            }
        }
        if let Some(prev) = out.last() {
            if entry.interval_end_ms < prev.interval_end_ms {
                return Err(TraceError::Order { line: i + 1, prev: prev.interval_end_ms, got: entry.interval_end_ms });
            }
        }
        out.push(entry);
    }
    Ok(out)
}

/// Runs the trace and returns one `StableCommit` event per non-empty commit.
///
/// A trailing open segment is closed with its last hypothesis.
pub fn simulate_trace(trace: &[TraceEntry], config: StabilizerConfig) -> Vec<PipelineEvent> {
    let mut stabilizer = Stabilizer::new(config);
    let mut events = Vec::new();
    let mut segment = 0;
    let mut open: Option<&TraceEntry> = None;
    for entry in trace {
        let hypothesis = entry.hypothesis();
        let committed = if entry.is_final {
            open = None;
            stabilizer.close_segment(&hypothesis, entry.interval_end_ms)
        } else {
            open = Some(entry);
            stabilizer.step(&hypothesis, entry.interval_end_ms)
        };
        if !committed.is_empty() {
            events.push(PipelineEvent::new(
                entry.interval_end_ms,
                EventKind::StableCommit(StableCommit { segment, words: committed }),
            ));
        }
        if entry.is_final {
            segment += 1;
        }
    }
    if let Some(last) = open {
        let committed = stabilizer.close_segment(&last.hypothesis(), last.interval_end_ms);
        if !committed.is_empty() {
            events.push(PipelineEvent::new(
                last.interval_end_ms,
                EventKind::StableCommit(StableCommit { segment, words: committed }),
            ));
        }
    }
    events
}
