//! Voice-probability segmentation.
//!
//! A segment is cut when the open segment would grow past the maximum segment
//! duration (MSD), or when voice probability has stayed strictly below the
//! threshold (VPT) for strictly longer than the maximum unvoiced duration (MUD).
//! Unvoiced audio stays inside the segment it belongs to, so segments always
//! partition the timeline.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timeline::AudioTimeline;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmenterConfig {
    pub max_unvoiced_duration_ms: u64,
    pub voice_prob_threshold: f64,
    pub max_segment_duration_ms: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum SegmenterConfigError {
    #[error("max_segment_duration_ms must be positive")]
    ZeroMaxSegment,
    #[error("voice_prob_threshold {0} outside [0, 1]")]
    Threshold(f64),
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<(), SegmenterConfigError> {
        if self.max_segment_duration_ms == 0 {
            return Err(SegmenterConfigError::ZeroMaxSegment);
        }
        if !(0.0..=1.0).contains(&self.voice_prob_threshold) {
            return Err(SegmenterConfigError::Threshold(self.voice_prob_threshold));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutReason {
    MaxDuration,
    UnvoicedRun,
    EndOfStream,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeechSegment {
    pub index: usize,
    pub start_ms: u64,
    pub end_ms: u64,
    pub cut_reason: CutReason,
}

impl SpeechSegment {
    pub fn duration_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }
}

#[derive(Debug, Clone)]
pub struct Segmenter {
    config: SegmenterConfig,
    next_index: usize,
    open_start_ms: u64,
    cursor_ms: u64,
    unvoiced_run_ms: u64,
}

impl Segmenter {
    pub fn new(config: SegmenterConfig) -> Self {
        Self { config, next_index: 0, open_start_ms: 0, cursor_ms: 0, unvoiced_run_ms: 0 }
    }

    pub fn config(&self) -> &SegmenterConfig {
        &self.config
    }

    /// Start of the segment currently being accumulated.
    pub fn open_start_ms(&self) -> u64 {
        self.open_start_ms
    }

    pub fn open_duration_ms(&self) -> u64 {
        self.cursor_ms - self.open_start_ms
    }

    /// Advances by one frame and returns any segments closed by it.
    ///
    /// Usually zero or one segment. A frame that does not tile the MSD can close
    /// the previous segment before it is added and then close again at its end;
    /// a frame longer than the MSD is split into MSD-sized pieces.
    pub fn push_frame(&mut self, duration_ms: u64, voice_prob: f64) -> Vec<SpeechSegment> {
        let msd = self.config.max_segment_duration_ms;
        let mut out = Vec::new();
        let mut remaining = duration_ms;
        while remaining > 0 {
            let piece = remaining.min(msd);
            remaining -= piece;

            if self.open_duration_ms() + piece > msd {
                out.push(self.cut(CutReason::MaxDuration));
            }
            self.cursor_ms += piece;
            if voice_prob < self.config.voice_prob_threshold {
                self.unvoiced_run_ms += piece;
            } else {
                self.unvoiced_run_ms = 0;
            }

            if self.unvoiced_run_ms > self.config.max_unvoiced_duration_ms {
                out.push(self.cut(CutReason::UnvoicedRun));
            } else if self.open_duration_ms() == msd {
                out.push(self.cut(CutReason::MaxDuration));
            }
        }
        out
    }

    /// Closes the open segment at end of stream. Idempotent.
    pub fn flush(&mut self) -> Option<SpeechSegment> {
        if self.open_duration_ms() == 0 {
            return None;
        }
        Some(self.cut(CutReason::EndOfStream))
    }

    fn cut(&mut self, cut_reason: CutReason) -> SpeechSegment {
        let segment = SpeechSegment {
            index: self.next_index,
            start_ms: self.open_start_ms,
            end_ms: self.cursor_ms,
            cut_reason,
        };
        self.next_index += 1;
        self.open_start_ms = self.cursor_ms;
        self.unvoiced_run_ms = 0;
        segment
    }
}

/// Segments a whole timeline, including the end-of-stream flush.
pub fn segment_timeline(timeline: &AudioTimeline, config: SegmenterConfig) -> Vec<SpeechSegment> {
    let mut segmenter = Segmenter::new(config);
    let mut out: Vec<SpeechSegment> = timeline
        .frames
        .iter()
        .flat_map(|f| segmenter.push_frame(f.duration_ms, f.voice_prob))
        .collect();
    out.extend(segmenter.flush());
    out
}
