//! Pipeline configuration: TOML loading, presets and validation.
//!
//! ```toml
//! preset = "en-de-low"        # optional base; explicit keys override it
//! seed = 7
//! frame_ms = 20
//!
//! [regime]
//! language_pair = "en-de"
//! regime = "low"
//!
//! [segmenter]
//! max_unvoiced_duration_ms = 100
//! voice_prob_threshold = 0.5
//! max_segment_duration_ms = 500
//!
//! [stabilizer]
//! cutoff_threshold_words = 8
//! agreement_window = 2
//! hypothesis_interval_ms = 200
//!
//! [agent]
//! min_chunk_size_words = 3
//! strict_chunk_trigger = false
//! memory_bank = "source"     # or "translation"
//! generation_budget = 64
//!
//! [prompt]
//! merge_prob = 0.2
//! shift_prob = 0.2
//! max_shift = 2
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{AgentConfig, MemoryBankMode, DEFAULT_GENERATION_BUDGET};
use crate::lang::{regime_threshold_ms, LanguagePair, LatencyRegime, LatencyRegimeConfig};
use crate::prompt::PerturbConfig;
use crate::segmenter::SegmenterConfig;
use crate::stabilizer::{StabilizerConfig, DEFAULT_AGREEMENT_WINDOW, DEFAULT_CUTOFF_THRESHOLD_WORDS};
use crate::timeline::DEFAULT_FRAME_MS;

pub const DEFAULT_HYPOTHESIS_INTERVAL_MS: u64 = 200;
pub const PRESET_NAMES: [&str; 4] = ["en-de-low", "en-de-high", "en-zh-low", "en-zh-high"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub frame_ms: u64,
    pub hypothesis_interval_ms: u64,
    pub segmenter: SegmenterConfig,
    pub stabilizer: StabilizerConfig,
    pub agent: AgentConfig,
    pub regime: LatencyRegimeConfig,
    pub prompt: PerturbConfig,
}

impl PipelineConfig {
    /// Tuned inference settings per language pair and latency regime
    /// (MUD ms, VPT, MSD ms, MCS).
    pub fn preset(name: &str) -> Option<Self> {
        let (pair, regime, mud, vpt, msd, mcs) = match name {
            "en-de-low" => (LanguagePair::EnDe, LatencyRegime::Low, 100, 0.5, 500, 3),
            "en-de-high" => (LanguagePair::EnDe, LatencyRegime::High, 100, 0.3, 1000, 7),
            "en-zh-low" => (LanguagePair::EnZh, LatencyRegime::Low, 100, 0.5, 500, 5),
            "en-zh-high" => (LanguagePair::EnZh, LatencyRegime::High, 100, 0.5, 1500, 7),
            _ => return None,
        };
        Some(Self {
            seed: 0,
            frame_ms: DEFAULT_FRAME_MS,
            hypothesis_interval_ms: DEFAULT_HYPOTHESIS_INTERVAL_MS,
            segmenter: SegmenterConfig {
                max_unvoiced_duration_ms: mud,
                voice_prob_threshold: vpt,
                max_segment_duration_ms: msd,
            },
            stabilizer: StabilizerConfig::default(),
            agent: AgentConfig::new(mcs, pair),
            regime: LatencyRegimeConfig::new(pair, regime),
            prompt: PerturbConfig::default(),
        })
    }

    pub fn language_pair(&self) -> LanguagePair {
        self.regime.language_pair
    }

    pub fn to_toml(&self) -> String {
        let raw = RawConfig {
            preset: None,
            seed: Some(self.seed),
            frame_ms: Some(self.frame_ms),
            regime: Some(RawRegime {
                language_pair: Some(self.regime.language_pair),
                regime: Some(self.regime.regime),
                threshold_ms: Some(self.regime.threshold_ms),
            }),
            segmenter: Some(RawSegmenter {
                max_unvoiced_duration_ms: Some(self.segmenter.max_unvoiced_duration_ms),
                voice_prob_threshold: Some(self.segmenter.voice_prob_threshold),
                max_segment_duration_ms: Some(self.segmenter.max_segment_duration_ms),
            }),
            stabilizer: Some(RawStabilizer {
                cutoff_threshold_words: Some(self.stabilizer.cutoff_threshold_words),
                agreement_window: Some(self.stabilizer.agreement_window),
                hypothesis_interval_ms: Some(self.hypothesis_interval_ms),
            }),
            agent: Some(RawAgent {
                min_chunk_size_words: Some(self.agent.min_chunk_size_words),
                strict_chunk_trigger: Some(self.agent.strict_chunk_trigger),
                memory_bank: Some(self.agent.memory_bank),
                generation_budget: Some(self.agent.generation_budget),
            }),
            prompt: Some(RawPrompt {
                merge_prob: Some(self.prompt.merge_prob),
                shift_prob: Some(self.prompt.shift_prob),
                max_shift: Some(self.prompt.max_shift),
            }),
        };
        toml::to_string(&raw).expect("config serializes")
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::preset("en-de-low").expect("built-in preset")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FieldError>),
}

impl ConfigError {
    pub fn fields(&self) -> &[FieldError] {
        match self {
            ConfigError::Invalid(v) => v,
            ConfigError::Parse(_) => &[],
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    seed: Option<u64>,
    frame_ms: Option<u64>,
    regime: Option<RawRegime>,
    segmenter: Option<RawSegmenter>,
    stabilizer: Option<RawStabilizer>,
    agent: Option<RawAgent>,
    prompt: Option<RawPrompt>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegime {
    language_pair: Option<LanguagePair>,
    regime: Option<LatencyRegime>,
    threshold_ms: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegmenter {
    max_unvoiced_duration_ms: Option<u64>,
    voice_prob_threshold: Option<f64>,
    max_segment_duration_ms: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStabilizer {
    cutoff_threshold_words: Option<usize>,
    agreement_window: Option<usize>,
    hypothesis_interval_ms: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    min_chunk_size_words: Option<usize>,
    strict_chunk_trigger: Option<bool>,
    memory_bank: Option<MemoryBankMode>,
    generation_budget: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrompt {
    merge_prob: Option<f64>,
    shift_prob: Option<f64>,
    max_shift: Option<usize>,
}

/// Parses and validates a TOML config. Every invalid field is reported with its path.
pub fn validate_config(text: &str) -> Result<PipelineConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let mut errors = Vec::new();
    let mut err = |path: &str, message: String| errors.push(FieldError { path: path.into(), message });

    let mut config = match raw.preset.as_deref() {
        None => PipelineConfig::default(),
        Some(name) => PipelineConfig::preset(name).unwrap_or_else(|| {
            err("preset", format!("unknown preset `{name}` (expected one of {})", PRESET_NAMES.join(", ")));
            PipelineConfig::default()
        }),
    };

    config.seed = raw.seed.unwrap_or(config.seed);
    config.frame_ms = raw.frame_ms.unwrap_or(config.frame_ms);
    if config.frame_ms == 0 {
        err("frame_ms", "must be positive".into());
    }

    let regime = raw.regime.unwrap_or_default();
    let pair = regime.language_pair.unwrap_or(config.regime.language_pair);
    let level = regime.regime.unwrap_or(config.regime.regime);
    config.regime = LatencyRegimeConfig::new(pair, level);
    config.agent.language_pair = pair;
    if let Some(t) = regime.threshold_ms {
        let expected = regime_threshold_ms(pair, level);
        if t != expected {
            err(
                "regime.threshold_ms",
                format!("{t} does not match the {pair} {} regime ceiling of {expected} ms", level.as_str()),
            );
        }
    }

    let seg = raw.segmenter.unwrap_or_default();
    let s = &mut config.segmenter;
    s.max_unvoiced_duration_ms = seg.max_unvoiced_duration_ms.unwrap_or(s.max_unvoiced_duration_ms);
    s.voice_prob_threshold = seg.voice_prob_threshold.unwrap_or(s.voice_prob_threshold);
    s.max_segment_duration_ms = seg.max_segment_duration_ms.unwrap_or(s.max_segment_duration_ms);
    if !(0.0..=1.0).contains(&s.voice_prob_threshold) {
        err("segmenter.voice_prob_threshold", format!("must be in [0, 1], got {}", s.voice_prob_threshold));
    }
    if s.max_segment_duration_ms == 0 {
        err("segmenter.max_segment_duration_ms", "must be positive".into());
    }

    let stab = raw.stabilizer.unwrap_or_default();
    config.stabilizer.cutoff_threshold_words =
        stab.cutoff_threshold_words.unwrap_or(DEFAULT_CUTOFF_THRESHOLD_WORDS);
    config.stabilizer.agreement_window = stab.agreement_window.unwrap_or(DEFAULT_AGREEMENT_WINDOW);
    config.hypothesis_interval_ms = stab.hypothesis_interval_ms.unwrap_or(config.hypothesis_interval_ms);
    if config.stabilizer.agreement_window < 2 {
        err("stabilizer.agreement_window", format!("must be at least 2, got {}", config.stabilizer.agreement_window));
    }
    if config.hypothesis_interval_ms == 0 {
        err("stabilizer.hypothesis_interval_ms", "must be positive".into());
    }

    let agent = raw.agent.unwrap_or_default();
    let a = &mut config.agent;
    a.min_chunk_size_words = agent.min_chunk_size_words.unwrap_or(a.min_chunk_size_words);
    a.strict_chunk_trigger = agent.strict_chunk_trigger.unwrap_or(a.strict_chunk_trigger);
    a.memory_bank = agent.memory_bank.unwrap_or(a.memory_bank);
    a.generation_budget = agent.generation_budget.unwrap_or(DEFAULT_GENERATION_BUDGET);
    if a.min_chunk_size_words == 0 {
        err("agent.min_chunk_size_words", "must be at least 1".into());
    }
    if a.generation_budget == 0 {
        err("agent.generation_budget", "must be at least 1".into());
    }

    let prompt = raw.prompt.unwrap_or_default();
    let p = &mut config.prompt;
    p.merge_prob = prompt.merge_prob.unwrap_or(p.merge_prob);
    p.shift_prob = prompt.shift_prob.unwrap_or(p.shift_prob);
    p.max_shift = prompt.max_shift.unwrap_or(p.max_shift);
    for (path, v) in [("prompt.merge_prob", p.merge_prob), ("prompt.shift_prob", p.shift_prob)] {
        if !(0.0..=1.0).contains(&v) {
            err(path, format!("must be in [0, 1], got {v}"));
        }
    }

    if errors.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid(errors))
    }
}
