//! Pipeline event log and its validation into an [`EmissionLog`].
//!
//! On the wire a log is JSON-lines, one event per line, keys in the fixed
//! order `time_ms`, `kind`, `payload` (then `wall_us` when instrumentation is
//! enabled). Payload keys follow the field order of the payload structs below.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segmenter::SpeechSegment;
use crate::stabilizer::StableWord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hypothesis {
    pub segment: usize,
    pub interval_end_ms: u64,
    pub is_final: bool,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableCommit {
    pub segment: usize,
    pub words: Vec<StableWord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationToken {
    pub sentence: usize,
    pub action: usize,
    pub token: String,
    /// End of the latest source word the emitting action had read.
    pub source_end_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceCompleted {
    pub sentence: usize,
    pub source_start_ms: u64,
    pub source_end_ms: u64,
    pub source: Vec<String>,
    pub translation: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventKind {
    SegmentClosed(SpeechSegment),
    HypothesisEmitted(Hypothesis),
    StableCommit(StableCommit),
    TranslationEmitted(TranslationToken),
    SentenceCompleted(SentenceCompleted),
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::SegmentClosed(_) => "SegmentClosed",
            EventKind::HypothesisEmitted(_) => "HypothesisEmitted",
            EventKind::StableCommit(_) => "StableCommit",
            EventKind::TranslationEmitted(_) => "TranslationEmitted",
            EventKind::SentenceCompleted(_) => "SentenceCompleted",
        }
    }

    /// Latest source time referenced by the payload.
    pub fn max_source_ms(&self) -> u64 {
        match self {
            EventKind::SegmentClosed(s) => s.end_ms,
            EventKind::HypothesisEmitted(h) => h.interval_end_ms,
            EventKind::StableCommit(c) => c.words.iter().map(|w| w.source_end_ms).max().unwrap_or(0),
            EventKind::TranslationEmitted(t) => t.source_end_ms,
            EventKind::SentenceCompleted(s) => s.source_end_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineEvent {
    pub time_ms: u64,
    #[serde(flatten)]
    pub kind: EventKind,
    /// Wall-clock microseconds since the run started; never affects behavior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_us: Option<u64>,
}

impl PipelineEvent {
    pub fn new(time_ms: u64, kind: EventKind) -> Self {
        Self { time_ms, kind, wall_us: None }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }
}

const EVENT_KEYS: [&str; 4] = ["time_ms", "kind", "payload", "wall_us"];

#[derive(Debug, Error, PartialEq)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("event {index}: time {got} ms precedes previous event at {prev} ms")]
    Order { index: usize, prev: u64, got: u64 },
}

/// Parses a JSON-lines event log. Blank lines are skipped; unknown keys are rejected.
pub fn parse_event_log(text: &str) -> Result<Vec<PipelineEvent>, LogError> {
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| LogError::Schema { line: i + 1, message };
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| schema(e.to_string()))?;
        let object = value.as_object().ok_or_else(|| schema("event is not a JSON object".into()))?;
        if let Some(key) = object.keys().find(|k| !EVENT_KEYS.contains(&k.as_str())) {
            return Err(schema(format!("unknown key `{key}`")));
        }
        let event: PipelineEvent = serde_json::from_value(value).map_err(|e| schema(e.to_string()))?;
        events.push(event);
    }
    Ok(events)
}

pub fn write_event_log(events: &[PipelineEvent]) -> String {
    let mut out = String::new();
    for event in events {
        out.push_str(&event.to_json());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmittedToken {
    pub text: String,
    pub emit_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub source_start_ms: u64,
    pub source_end_ms: u64,
    /// Reference translation; empty until references are attached.
    pub reference: String,
    pub tokens: Range<usize>,
}

/// Timestamped output tokens plus sentence alignment: the input to evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmissionLog {
    pub tokens: Vec<EmittedToken>,
    pub source_duration_ms: u64,
    pub sentences: Vec<SentenceSpan>,
}

impl EmissionLog {
    pub fn token_texts(&self, range: Range<usize>) -> Vec<String> {
        self.tokens[range].iter().map(|t| t.text.clone()).collect()
    }

    /// Per-sentence hypotheses as space-joined token text.
    pub fn hypotheses(&self) -> Vec<String> {
        self.sentences.iter().map(|s| self.token_texts(s.tokens.clone()).join(" ")).collect()
    }

    pub fn with_references(mut self, references: &[String]) -> Result<Self, crate::eval::EvalError> {
        if references.len() != self.sentences.len() {
            return Err(crate::eval::EvalError::LengthMismatch {
                hypotheses: self.sentences.len(),
                references: references.len(),
            });
        }
        for (s, r) in self.sentences.iter_mut().zip(references) {
            s.reference = r.clone();
        }
        Ok(self)
    }
}

/// Validates an event log and extracts its emissions.
///
/// Rejects time regressions, and sentence completions whose translation does
/// not match the tokens emitted for that sentence since the previous completion.
pub fn replay_log(events: &[PipelineEvent]) -> Result<EmissionLog, LogError> {
    let mut log = EmissionLog::default();
    let mut prev_time = 0;
    let mut sentence_start = 0;
    let mut last_time = 0;
    for (index, event) in events.iter().enumerate() {
        if event.time_ms < prev_time {
            return Err(LogError::Order { index, prev: prev_time, got: event.time_ms });
        }
        prev_time = event.time_ms;
        last_time = event.time_ms;
        let schema = |message: String| LogError::Schema { line: index + 1, message };
        match &event.kind {
            EventKind::SegmentClosed(s) => {
                log.source_duration_ms = log.source_duration_ms.max(s.end_ms);
            }
            EventKind::TranslationEmitted(t) => {
                if t.sentence != log.sentences.len() {
                    return Err(schema(format!(
                        "token for sentence {} while sentence {} is open",
                        t.sentence,
                        log.sentences.len()
                    )));
                }
                log.tokens.push(EmittedToken { text: t.token.clone(), emit_time_ms: event.time_ms });
            }
            EventKind::SentenceCompleted(s) => {
                if s.sentence != log.sentences.len() {
                    return Err(schema(format!(
                        "sentence {} completed, expected {}",
                        s.sentence,
                        log.sentences.len()
                    )));
                }
                let range = sentence_start..log.tokens.len();
                if log.token_texts(range.clone()) != s.translation {
                    return Err(schema(format!("sentence {} translation does not match its emitted tokens", s.sentence)));
                }
                log.sentences.push(SentenceSpan {
                    source_start_ms: s.source_start_ms,
                    source_end_ms: s.source_end_ms,
                    reference: String::new(),
                    tokens: range,
                });
                sentence_start = log.tokens.len();
            }
            EventKind::HypothesisEmitted(_) | EventKind::StableCommit(_) => {}
        }
    }
    if log.source_duration_ms == 0 {
        log.source_duration_ms = last_time;
    }
    Ok(log)
}
