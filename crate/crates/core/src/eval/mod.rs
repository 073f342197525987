//! Latency and quality metrics over emission logs.
//!
//! `stream_laal` is LAAL computed per aligned sentence (times re-based to the
//! sentence's source interval) and averaged without weights. Sentence
//! alignment comes from timestamps carried in the log rather than from
//! WER-based resegmentation, so the value approximates StreamLAAL.

mod bleu;
mod laal;
mod sweep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bleu::{corpus_bleu, tokenize_13a, tokenize_chars, BleuScore, BleuTokenizer, Smoothing};
pub use laal::{expand_units, laal, laal_delays, stream_laal, unit_len, StreamLatency};
pub use sweep::{format_table, rows_to_jsonl, run_point, sweep, SweepGrid, SweepPoint, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Word,
    Char,
}

impl std::str::FromStr for Unit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word" => Ok(Unit::Word),
            "char" => Ok(Unit::Char),
            other => Err(format!("unknown unit `{other}` (expected word or char)")),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no output to score")]
    EmptyOutput,
    #[error("sentence token ranges do not partition the output: {0}")]
    AlignmentGap(String),
    #[error("{hypotheses} hypotheses but {references} references")]
    LengthMismatch { hypotheses: usize, references: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub bleu: f64,
    pub stream_laal_ms: f64,
    pub sentences: Vec<SentenceReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceReport {
    pub hypothesis: String,
    pub reference: String,
    pub laal_ms: Option<f64>,
}

/// BLEU and latency for a log whose sentences carry references.
pub fn evaluate(
    log: &crate::events::EmissionLog,
    unit: Unit,
    smoothing: Smoothing,
) -> Result<MetricReport, EvalError> {
    let latency = stream_laal(log, unit)?;
    let hypotheses = log.hypotheses();
    let references: Vec<String> = log.sentences.iter().map(|s| s.reference.clone()).collect();
    let tokenizer = match unit {
        Unit::Word => BleuTokenizer::Word13a,
        Unit::Char => BleuTokenizer::Char,
    };
    let bleu = corpus_bleu(&hypotheses, &references, tokenizer, smoothing)?;
    let sentences = hypotheses
        .into_iter()
        .zip(references)
        .zip(latency.per_sentence.iter())
        .map(|((hypothesis, reference), &laal_ms)| SentenceReport { hypothesis, reference, laal_ms })
        .collect();
    Ok(MetricReport { bleu: bleu.score, stream_laal_ms: latency.mean_ms, sentences })
}
