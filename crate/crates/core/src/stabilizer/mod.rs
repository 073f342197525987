//! Stable transcription policy.
//!
//! Successive ASR hypotheses for the open segment are compared word by word;
//! only the prefix on which the last `agreement_window` hypotheses agree is
//! committed. Commits are append-only. When a segment closes, its final
//! hypothesis is committed whole and its transcript (truncated to the most
//! recent `cutoff_threshold_words`) becomes ASR context for the next segment.

mod engines;
mod trace;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub use engines::{TimedWord, TranscriptAsr, TranscriptError};
pub use trace::{parse_trace, simulate_trace, TraceEntry, TraceError};

pub const DEFAULT_CUTOFF_THRESHOLD_WORDS: usize = 8;
pub const DEFAULT_AGREEMENT_WINDOW: usize = 2;

/// A hypothesis word with the source time at which it ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypWord {
    pub text: String,
    pub end_ms: u64,
}

impl HypWord {
    pub fn new(text: impl Into<String>, end_ms: u64) -> Self {
        Self { text: text.into(), end_ms }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AsrRequest<'a> {
    pub segment_start_ms: u64,
    pub interval_end_ms: u64,
    /// The segment has closed and this is its last transcription.
    pub is_final: bool,
    pub context: &'a [String],
}

/// An incremental speech recognizer transcribing audio within the open segment.
///
/// Reference engines must be deterministic: identical requests give identical
/// hypotheses.
pub trait AsrEngine {
    fn transcribe(&mut self, request: &AsrRequest<'_>) -> Vec<HypWord>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableWord {
    pub text: String,
    pub commit_time_ms: u64,
    pub source_end_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerConfig {
    pub cutoff_threshold_words: usize,
    pub agreement_window: usize,
}

impl Default for StabilizerConfig {
    fn default() -> Self {
        Self { cutoff_threshold_words: DEFAULT_CUTOFF_THRESHOLD_WORDS, agreement_window: DEFAULT_AGREEMENT_WINDOW }
    }
}

/// Collapses internal whitespace and trims. Empty words are dropped by callers.
pub fn normalize_word(word: &str) -> String {
    word.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn normalize(hypothesis: &[HypWord]) -> Vec<HypWord> {
    hypothesis
        .iter()
        .map(|w| HypWord { text: normalize_word(&w.text), end_ms: w.end_ms })
        .filter(|w| !w.text.is_empty())
        .collect()
}

#[derive(Debug, Clone)]
pub struct Stabilizer {
    config: StabilizerConfig,
    recent: VecDeque<Vec<HypWord>>,
    segment_words: Vec<StableWord>,
    transcript: Vec<StableWord>,
    segment_boundaries: Vec<usize>,
    context: Vec<String>,
}

impl Stabilizer {
    pub fn new(config: StabilizerConfig) -> Self {
        Self {
            config,
            recent: VecDeque::new(),
            segment_words: Vec::new(),
            transcript: Vec::new(),
            segment_boundaries: Vec::new(),
            context: Vec::new(),
        }
    }

    pub fn config(&self) -> &StabilizerConfig {
        &self.config
    }

    /// Feeds the next hypothesis for the open segment and returns newly committed words.
    pub fn step(&mut self, hypothesis: &[HypWord], now_ms: u64) -> Vec<StableWord> {
        let window = self.config.agreement_window.max(1);
        self.recent.push_back(normalize(hypothesis));
        while self.recent.len() > window {
            self.recent.pop_front();
        }
        if self.recent.len() < window {
            return Vec::new();
        }

        let latest = self.recent.back().expect("non-empty window");
        let agreed = (0..latest.len())
            .take_while(|&i| self.recent.iter().all(|h| h.get(i).map(|w| &w.text) == Some(&latest[i].text)))
            .count();
        let committed = self.segment_words.len();
        if agreed <= committed {
            return Vec::new();
        }
        let fresh: Vec<HypWord> = latest[committed..agreed].to_vec();
        self.commit(&fresh, now_ms)
    }

    /// Commits the final hypothesis of the segment and rolls the context buffer.
    pub fn close_segment(&mut self, final_hypothesis: &[HypWord], now_ms: u64) -> Vec<StableWord> {
        let final_hypothesis = normalize(final_hypothesis);
        let committed = self.segment_words.len();
        let fresh = final_hypothesis.get(committed..).unwrap_or_default().to_vec();
        let out = self.commit(&fresh, now_ms);

        if !self.segment_words.is_empty() {
            let words: Vec<String> = self.segment_words.iter().map(|w| w.text.clone()).collect();
            let keep = words.len().min(self.config.cutoff_threshold_words);
            self.context = words[words.len() - keep..].to_vec();
        }
        self.segment_boundaries.push(self.transcript.len());
        self.segment_words.clear();
        self.recent.clear();
        out
    }

    /// Previous segment's transcript, limited to the cutoff threshold (most recent words kept).
    pub fn context_for_next_call(&self) -> &[String] {
        &self.context
    }

    pub fn transcript(&self) -> &[StableWord] {
        &self.transcript
    }

    /// Transcript indices at which each closed segment ended.
    pub fn segment_boundaries(&self) -> &[usize] {
        &self.segment_boundaries
    }

    fn commit(&mut self, words: &[HypWord], now_ms: u64) -> Vec<StableWord> {
        let floor = self.transcript.last().map_or(0, |w| w.commit_time_ms);
        let commit_time_ms = now_ms.max(floor);
        let out: Vec<StableWord> = words
            .iter()
            .map(|w| StableWord { text: w.text.clone(), commit_time_ms, source_end_ms: w.end_ms.min(commit_time_ms) })
            .collect();
        self.segment_words.extend(out.iter().cloned());
        self.transcript.extend(out.iter().cloned());
        out
    }
}
