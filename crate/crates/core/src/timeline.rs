//! The source stream as contiguous frames of voice probability.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_FRAME_MS: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frame {
    pub start_ms: u64,
    pub duration_ms: u64,
    pub voice_prob: f64,
}

impl Frame {
    pub fn end_ms(&self) -> u64 {
        self.start_ms + self.duration_ms
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TimelineError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("frame {index}: starts at {got} ms, expected {expected} ms")]
    NotContiguous { index: usize, expected: u64, got: u64 },
    #[error("frame {index}: voice probability {prob} outside [0, 1]")]
    ProbOutOfRange { index: usize, prob: f64 },
    #[error("frame {index}: zero duration")]
    ZeroDuration { index: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AudioTimeline {
    pub frames: Vec<Frame>,
    pub total_duration_ms: u64,
}

impl AudioTimeline {
    pub fn new(frames: Vec<Frame>) -> Result<Self, TimelineError> {
        let mut cursor = 0;
        for (index, frame) in frames.iter().enumerate() {
            if frame.start_ms != cursor {
                return Err(TimelineError::NotContiguous { index, expected: cursor, got: frame.start_ms });
            }
            if frame.duration_ms == 0 {
                return Err(TimelineError::ZeroDuration { index });
            }
            if !(0.0..=1.0).contains(&frame.voice_prob) {
                return Err(TimelineError::ProbOutOfRange { index, prob: frame.voice_prob });
            }
            cursor += frame.duration_ms;
        }
        Ok(Self { frames, total_duration_ms: cursor })
    }

    /// Builds a timeline of equal-length frames starting at zero.
    pub fn from_probs(frame_ms: u64, probs: &[f64]) -> Result<Self, TimelineError> {
        let frames = probs
            .iter()
            .enumerate()
            .map(|(i, &voice_prob)| Frame { start_ms: i as u64 * frame_ms, duration_ms: frame_ms, voice_prob })
            .collect();
        Self::new(frames)
    }

    /// Parses JSON-lines of frames. Blank lines are ignored.
    pub fn parse_jsonl(text: &str) -> Result<Self, TimelineError> {
        let mut frames = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let frame: Frame = serde_json::from_str(line)
                .map_err(|e| TimelineError::Schema { line: i + 1, message: e.to_string() })?;
            frames.push(frame);
        }
        Self::new(frames)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for frame in &self.frames {
            out.push_str(&serde_json::to_string(frame).expect("frame serializes"));
            out.push('\n');
        }
        out
    }
}
