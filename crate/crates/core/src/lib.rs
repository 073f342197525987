//! Deterministic cascaded simultaneous speech-to-text translation.
//!
//! The pipeline is a chain of pure state machines driven on the source-audio
//! clock:
//!
//! ```text
//! AudioTimeline -> Segmenter -> Stabilizer (+ AsrEngine) -> Agent (+ TranslationEngine) -> event log
//! ```
//!
//! Heavy models sit behind [`stabilizer::AsrEngine`], [`agent::TranslationEngine`]
//! and [`cleaner::QualityScorer`]; the crate ships scripted reference engines so
//! every stage can run and be evaluated without any model weights.

pub mod agent;
pub mod cleaner;
pub mod config;
pub mod eval;
pub mod events;
pub mod fixtures;
pub mod lang;
pub mod pipeline;
pub mod prompt;
pub mod segmenter;
pub mod stabilizer;
pub mod timeline;

pub use config::PipelineConfig;
pub use events::{replay_log, EmissionLog, EventKind, PipelineEvent};
pub use lang::{LanguagePair, LatencyRegime, LatencyRegimeConfig};
pub use pipeline::{run_pipeline, EngineBundle};
pub use timeline::{AudioTimeline, Frame};
