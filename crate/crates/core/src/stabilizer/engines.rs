use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AsrEngine, AsrRequest, HypWord};

/// A ground-truth word with its source span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimedWord {
    pub text: String,
    pub start_ms: u64,
    pub end_ms: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum TranscriptError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("word {index} `{text}`: end {end_ms} ms not after start {start_ms} ms")]
    EmptySpan { index: usize, text: String, start_ms: u64, end_ms: u64 },
    #[error("word {index} `{text}` starts before the previous word ends")]
    Overlap { index: usize, text: String },
}

/// Reference ASR engine that reveals a timed transcript as audio arrives.
///
/// A word is recognized once its end time falls inside the requested interval
/// of the open segment. With `partial_prob > 0`, a non-final hypothesis may
/// additionally carry a truncated form of the word still being spoken, which
/// the next hypothesis revises. The choice is a pure function of
/// `(seed, interval_end_ms)`.
#[derive(Debug, Clone)]
pub struct TranscriptAsr {
    words: Vec<TimedWord>,
    partial_prob: f64,
    seed: u64,
}

impl TranscriptAsr {
    pub fn new(words: Vec<TimedWord>, partial_prob: f64, seed: u64) -> Result<Self, TranscriptError> {
        let mut last_end = 0;
        for (index, w) in words.iter().enumerate() {
            if w.end_ms <= w.start_ms {
                return Err(TranscriptError::EmptySpan {
                    index,
                    text: w.text.clone(),
                    start_ms: w.start_ms,
                    end_ms: w.end_ms,
                });
            }
            if w.start_ms < last_end {
                return Err(TranscriptError::Overlap { index, text: w.text.clone() });
            }
            last_end = w.end_ms;
        }
        Ok(Self { words, partial_prob: partial_prob.clamp(0.0, 1.0), seed })
    }

    pub fn words(&self) -> &[TimedWord] {
        &self.words
    }

    pub fn parse_jsonl(text: &str) -> Result<Vec<TimedWord>, TranscriptError> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| TranscriptError::Schema { line: i + 1, message: e.to_string() })
            })
            .collect()
    }

    fn partial_word(&self, request: &AsrRequest<'_>) -> Option<HypWord> {
        let now = request.interval_end_ms;
        let word = self
            .words
            .iter()
            .find(|w| w.start_ms < now && now < w.end_ms && w.start_ms >= request.segment_start_ms)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ now.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        if rng.random::<f64>() >= self.partial_prob {
            return None;
        }
        let chars: Vec<char> = word.text.chars().collect();
        let heard = (now - word.start_ms) as f64 / (word.end_ms - word.start_ms) as f64;
        let keep = ((chars.len() as f64 * heard).floor() as usize).max(1);
        if keep >= chars.len() {
            return None;
        }
        Some(HypWord { text: chars[..keep].iter().collect(), end_ms: now })
    }
}

impl AsrEngine for TranscriptAsr {
    fn transcribe(&mut self, request: &AsrRequest<'_>) -> Vec<HypWord> {
        let mut out: Vec<HypWord> = self
            .words
            .iter()
            .filter(|w| request.segment_start_ms < w.end_ms && w.end_ms <= request.interval_end_ms)
            .map(|w| HypWord { text: w.text.clone(), end_ms: w.end_ms })
            .collect();
        if !request.is_final && self.partial_prob > 0.0 {
            out.extend(self.partial_word(request));
        }
        out
    }
}
