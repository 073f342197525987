//! End-to-end cascade: segmenter, ASR with stable commits, translation agent.
//!
//! The run is driven by the audio timeline alone. Events carry the simulated
//! audio time at which they happen; segment closures and everything they
//! trigger are stamped with the segment's end.

use std::time::Instant;

use thiserror::Error;

use crate::agent::{Agent, TranslationEngine};
use crate::config::PipelineConfig;
use crate::events::{EventKind, Hypothesis, PipelineEvent, StableCommit};
use crate::segmenter::{Segmenter, SegmenterConfigError, SpeechSegment};
use crate::stabilizer::{AsrEngine, AsrRequest, HypWord, Stabilizer, StableWord};
use crate::timeline::AudioTimeline;

pub struct EngineBundle {
    pub asr: Box<dyn AsrEngine>,
    pub translator: Box<dyn TranslationEngine>,
}

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Segmenter(#[from] SegmenterConfigError),
    #[error("hypothesis interval must be positive")]
    ZeroHypothesisInterval,
    #[error("at {time_ms} ms: ASR word `{word}` ends at {end_ms} ms, after the transcribed interval")]
    HypothesisBeyondInterval { time_ms: u64, word: String, end_ms: u64 },
}

struct Run<'a> {
    config: &'a PipelineConfig,
    engines: &'a mut EngineBundle,
    stabilizer: Stabilizer,
    agent: Agent,
    segment: usize,
    events: Vec<PipelineEvent>,
    started: Option<Instant>,
}

impl Run<'_> {
    fn push(&mut self, time_ms: u64, kind: EventKind) {
        let mut event = PipelineEvent::new(time_ms, kind);
        event.wall_us = self.started.map(|s| s.elapsed().as_micros() as u64);
        self.events.push(event);
    }

    fn transcribe(&mut self, start_ms: u64, end_ms: u64, is_final: bool) -> Result<Vec<HypWord>, PipelineError> {
        let context = self.stabilizer.context_for_next_call().to_vec();
        let request = AsrRequest { segment_start_ms: start_ms, interval_end_ms: end_ms, is_final, context: &context };
        let words = self.engines.asr.transcribe(&request);
        if let Some(w) = words.iter().find(|w| w.end_ms > end_ms) {
            return Err(PipelineError::HypothesisBeyondInterval {
                time_ms: end_ms,
                word: w.text.clone(),
                end_ms: w.end_ms,
            });
        }
        self.push(
            end_ms,
            EventKind::HypothesisEmitted(Hypothesis {
                segment: self.segment,
                interval_end_ms: end_ms,
                is_final,
                words: words.iter().map(|w| w.text.clone()).collect(),
            }),
        );
        Ok(words)
    }

    fn committed(&mut self, time_ms: u64, words: Vec<StableWord>) {
        if words.is_empty() {
            return;
        }
        self.push(time_ms, EventKind::StableCommit(StableCommit { segment: self.segment, words: words.clone() }));
        let actions = self.agent.ingest(&words, &mut self.engines.translator);
        for action in actions {
            for event in action.to_events(time_ms) {
                self.push(event.time_ms, event.kind);
            }
        }
    }

    fn hypothesis(&mut self, start_ms: u64, now_ms: u64) -> Result<(), PipelineError> {
        let words = self.transcribe(start_ms, now_ms, false)?;
        let fresh = self.stabilizer.step(&words, now_ms);
        self.committed(now_ms, fresh);
        Ok(())
    }

    fn close(&mut self, segment: SpeechSegment) -> Result<(), PipelineError> {
        self.push(segment.end_ms, EventKind::SegmentClosed(segment));
        let words = self.transcribe(segment.start_ms, segment.end_ms, true)?;
        let fresh = self.stabilizer.close_segment(&words, segment.end_ms);
        self.committed(segment.end_ms, fresh);
        self.segment += 1;
        Ok(())
    }
}

/// Runs the full cascade over a timeline and returns its event log.
pub fn run_pipeline(
    timeline: &AudioTimeline,
    config: &PipelineConfig,
    engines: &mut EngineBundle,
) -> Result<Vec<PipelineEvent>, PipelineError> {
    run(timeline, config, engines, false)
}

/// Like [`run_pipeline`], additionally stamping every event with wall-clock
/// microseconds since the start of the run.
pub fn run_pipeline_instrumented(
    timeline: &AudioTimeline,
    config: &PipelineConfig,
    engines: &mut EngineBundle,
) -> Result<Vec<PipelineEvent>, PipelineError> {
    run(timeline, config, engines, true)
}

fn run(
    timeline: &AudioTimeline,
    config: &PipelineConfig,
    engines: &mut EngineBundle,
    instrument: bool,
) -> Result<Vec<PipelineEvent>, PipelineError> {
    config.segmenter.validate()?;
    let cadence = config.hypothesis_interval_ms;
    if cadence == 0 {
        return Err(PipelineError::ZeroHypothesisInterval);
    }

    let mut segmenter = Segmenter::new(config.segmenter);
    let mut run = Run {
        config,
        engines,
        stabilizer: Stabilizer::new(config.stabilizer),
        agent: Agent::new(config.agent),
        segment: 0,
        events: Vec::new(),
        started: instrument.then(Instant::now),
    };

    let mut next_hypothesis_ms = cadence;
    for frame in &timeline.frames {
        for segment in segmenter.push_frame(frame.duration_ms, frame.voice_prob) {
            run.close(segment)?;
        }
        let now = frame.end_ms();
        if now >= next_hypothesis_ms {
            next_hypothesis_ms = (now / cadence + 1) * cadence;
            if segmenter.open_duration_ms() > 0 {
                run.hypothesis(segmenter.open_start_ms(), now)?;
            }
        }
    }
    if let Some(segment) = segmenter.flush() {
        run.close(segment)?;
    }

    let end_ms = timeline.total_duration_ms.max(run.events.last().map_or(0, |e| e.time_ms));
    let actions = run.agent.flush(&mut run.engines.translator);
    for action in actions {
        for event in action.to_events(end_ms) {
            run.push(event.time_ms, event.kind);
        }
    }
    log::debug!(
        "pipeline finished: {} events, {} segments, config seed {}",
        run.events.len(),
        run.segment,
        run.config.seed
    );
    Ok(run.events)
}

/// The stable transcript carried by a log's commit events.
pub fn stable_transcript(events: &[PipelineEvent]) -> Vec<String> {
    events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::StableCommit(c) => Some(c.words.iter().map(|w| w.text.clone())),
            _ => None,
        })
        .flatten()
        .collect()
}

/// All translation tokens of a log, in emission order.
pub fn translation_tokens(events: &[PipelineEvent]) -> Vec<String> {
    events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::TranslationEmitted(t) => Some(t.token.clone()),
            _ => None,
        })
        .collect()
}
