//! Built-in synthetic scenarios: a timeline, a timed transcript, references,
//! a translation dictionary and a config, written as a self-contained bundle.
//!
//! Bundle layout:
//!
//! ```text
//! scenario.toml     name, engine settings, scoring unit
//! config.toml       pipeline config
//! timeline.jsonl    one frame per line
//! transcript.jsonl  one timed word per line
//! references.txt    one reference translation per sentence
//! dict.tsv          source<TAB>target lexicon
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{DictionaryEngine, DictionaryError, IdentityEngine};
use crate::config::{validate_config, ConfigError, PipelineConfig};
use crate::eval::Unit;
use crate::pipeline::EngineBundle;
use crate::stabilizer::{TimedWord, TranscriptAsr, TranscriptError};
use crate::timeline::{AudioTimeline, TimelineError};

pub const FIXTURE_NAMES: [&str; 3] = ["greetings", "silence", "lecture"];

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("unknown fixture `{0}` (available: greetings, silence, lecture)")]
    UnknownFixture(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Identity,
    Dictionary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    pub engine: EngineKind,
    #[serde(default)]
    pub lookahead: bool,
    /// Probability that a non-final hypothesis carries a truncated in-progress word.
    #[serde(default)]
    pub partial_prob: f64,
    pub unit: Unit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub manifest: Manifest,
    pub config: PipelineConfig,
    pub timeline: AudioTimeline,
    pub transcript: Vec<TimedWord>,
    pub references: Vec<String>,
    pub dictionary: BTreeMap<String, String>,
}

impl Scenario {
    /// Fresh engines for one run; ASR partials are seeded from the config seed.
    pub fn engines(&self) -> EngineBundle {
        self.engines_with(self.manifest.engine)
    }

    pub fn engines_with(&self, engine: EngineKind) -> EngineBundle {
        let asr = TranscriptAsr::new(self.transcript.clone(), self.manifest.partial_prob, self.config.seed)
            .expect("scenario transcript was validated");
        let translator: Box<dyn crate::agent::TranslationEngine> = match engine {
            EngineKind::Identity => Box::new(IdentityEngine),
            EngineKind::Dictionary => Box::new(DictionaryEngine::new(self.dictionary.clone(), self.manifest.lookahead)),
        };
        EngineBundle { asr: Box::new(asr), translator }
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), FixtureError> {
        fs::create_dir_all(dir).map_err(|source| FixtureError::Io { path: dir.into(), source })?;
        let transcript: String = self
            .transcript
            .iter()
            .map(|w| serde_json::to_string(w).expect("words serialize") + "\n")
            .collect();
        let dict: String = self.dictionary.iter().map(|(s, t)| format!("{s}\t{t}\n")).collect();
        let references: String = self.references.iter().map(|r| format!("{r}\n")).collect();
        let files = [
            ("scenario.toml", toml::to_string(&self.manifest).expect("manifest serializes")),
            ("config.toml", self.config.to_toml()),
            ("timeline.jsonl", self.timeline.to_jsonl()),
            ("transcript.jsonl", transcript),
            ("references.txt", references),
            ("dict.tsv", dict),
        ];
        for (name, contents) in files {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|source| FixtureError::Io { path, source })?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, FixtureError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|source| FixtureError::Io { path, source })
        };
        let invalid = |name: &str, message: String| FixtureError::Invalid { path: dir.join(name), message };

        let manifest: Manifest =
            toml::from_str(&read("scenario.toml")?).map_err(|e| invalid("scenario.toml", e.to_string()))?;
        let config = validate_config(&read("config.toml")?).map_err(|e: ConfigError| invalid("config.toml", e.to_string()))?;
        let timeline = AudioTimeline::parse_jsonl(&read("timeline.jsonl")?)
            .map_err(|e: TimelineError| invalid("timeline.jsonl", e.to_string()))?;
        let transcript = TranscriptAsr::parse_jsonl(&read("transcript.jsonl")?)
            .and_then(|w| TranscriptAsr::new(w.clone(), 0.0, 0).map(|_| w))
            .map_err(|e: TranscriptError| invalid("transcript.jsonl", e.to_string()))?;
        let references = read("references.txt")?.lines().map(str::to_string).collect();
        let dictionary = DictionaryEngine::parse_tsv(&read("dict.tsv")?)
            .map_err(|e: DictionaryError| invalid("dict.tsv", e.to_string()))?;
        Ok(Self { manifest, config, timeline, transcript, references, dictionary })
    }
}

struct Script {
    preset: &'static str,
    sentences: &'static [&'static str],
    references: &'static [&'static str],
    lexicon: &'static [(&'static str, &'static str)],
    lead_in_ms: u64,
    tail_ms: u64,
    unit: Unit,
}

const GREETINGS: Script = Script {
    preset: "en-de-low",
    sentences: &[
        "Good morning everyone and welcome to the workshop.",
        "Today we will talk about simultaneous speech translation.",
    ],
    references: &[
        "Guten Morgen zusammen und willkommen zum Workshop.",
        "Heute sprechen wir über simultane Sprachübersetzung.",
    ],
    lexicon: &[
        ("good", "Guten"),
        ("morning", "Morgen"),
        ("everyone", "zusammen"),
        ("and", "und"),
        ("welcome", "willkommen"),
        ("to", "zum"),
        ("the", ""),
        ("workshop", "Workshop"),
        ("today", "Heute"),
        ("we", "wir"),
        ("will", ""),
        ("talk", "sprechen"),
        ("about", "über"),
        ("simultaneous", "simultane"),
        ("speech", ""),
        ("translation", "Sprachübersetzung"),
    ],
    lead_in_ms: 600,
    tail_ms: 1000,
    unit: Unit::Word,
};

const LECTURE: Script = Script {
    preset: "en-zh-low",
    sentences: &[
        "Machine translation has improved a lot.",
        "Large models can now translate speech in real time.",
        "Latency is still a challenge.",
    ],
    references: &["机器翻译进步了很多。", "大模型现在可以实时翻译语音。", "延迟仍然是一个挑战。"],
    lexicon: &[
        ("machine", "机器"),
        ("translation", "翻译"),
        ("has", ""),
        ("improved", "进步了"),
        ("a", ""),
        ("lot", "很多"),
        (".", "。"),
        ("large", "大"),
        ("models", "模型"),
        ("can", "可以"),
        ("now", "现在"),
        ("translate", "翻译"),
        ("speech", "语音"),
        ("in", ""),
        ("real", "实"),
        ("time", "时"),
        ("latency", "延迟"),
        ("is", "是"),
        ("still", "仍然"),
        ("challenge", "一个挑战"),
    ],
    lead_in_ms: 400,
    tail_ms: 800,
    unit: Unit::Char,
};

const WORD_GAP_MS: u64 = 140;
const SENTENCE_GAP_MS: u64 = 700;

fn word_duration_ms(word: &str) -> u64 {
    let letters = word.chars().filter(|c| c.is_alphanumeric()).count() as u64;
    (160 + 45 * letters).min(620)
}

fn round_up(ms: u64, frame_ms: u64) -> u64 {
    ms.div_ceil(frame_ms) * frame_ms
}

fn timed_words(script: &Script) -> (Vec<TimedWord>, u64) {
    let mut words = Vec::new();
    let mut t = script.lead_in_ms;
    for (k, sentence) in script.sentences.iter().enumerate() {
        if k > 0 {
            t += SENTENCE_GAP_MS - WORD_GAP_MS;
        }
        for word in sentence.split_whitespace() {
            let end = t + word_duration_ms(word);
            words.push(TimedWord { text: word.to_string(), start_ms: t, end_ms: end });
            t = end + WORD_GAP_MS;
        }
    }
    let speech_end = words.last().map_or(0, |w| w.end_ms);
    (words, speech_end + script.tail_ms)
}

/// Frame-level voice probabilities: about 0.9 inside words, about 0.08 outside,
/// with seeded jitter that never crosses 0.5.
fn synth_timeline(words: &[TimedWord], total_ms: u64, frame_ms: u64, seed: u64) -> AudioTimeline {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = round_up(total_ms, frame_ms) / frame_ms;
    let probs: Vec<f64> = (0..frames)
        .map(|i| {
            let mid = i * frame_ms + frame_ms / 2;
            let voiced = words.iter().any(|w| w.start_ms <= mid && mid < w.end_ms);
            let jitter = rng.random_range(-0.06..=0.06);
            let p: f64 = if voiced { 0.9 + jitter } else { 0.08 + jitter };
            (p.clamp(0.0, 1.0) * 1000.0).round() / 1000.0
        })
        .collect();
    AudioTimeline::from_probs(frame_ms, &probs).expect("synthetic timeline is valid")
}

fn scripted(name: &str, script: &Script, seed: u64, engine: EngineKind, partial_prob: f64) -> Scenario {
    let mut config = PipelineConfig::preset(script.preset).expect("built-in preset");
    config.seed = seed;
    let (transcript, total_ms) = timed_words(script);
    let timeline = synth_timeline(&transcript, total_ms, config.frame_ms, seed);
    Scenario {
        manifest: Manifest { name: name.to_string(), engine, lookahead: false, partial_prob, unit: script.unit },
        config,
        timeline,
        transcript,
        references: script.references.iter().map(|r| r.to_string()).collect(),
        dictionary: script.lexicon.iter().map(|&(s, t)| (s.to_string(), t.to_string())).collect(),
    }
}

/// Builds a named scenario. The seed drives timeline jitter and ASR partials.
pub fn make_fixture(name: &str, seed: u64) -> Result<Scenario, FixtureError> {
    match name {
        "greetings" => Ok(scripted(name, &GREETINGS, seed, EngineKind::Dictionary, 0.3)),
        "lecture" => Ok(scripted(name, &LECTURE, seed, EngineKind::Dictionary, 0.3)),
        "silence" => {
            let config = PipelineConfig { seed, ..PipelineConfig::default() };
            let timeline = synth_timeline(&[], 3000, config.frame_ms, seed);
            Ok(Scenario {
                manifest: Manifest {
                    name: name.to_string(),
                    engine: EngineKind::Identity,
                    lookahead: false,
                    partial_prob: 0.0,
                    unit: Unit::Word,
                },
                config,
                timeline,
                transcript: Vec::new(),
                references: Vec::new(),
                dictionary: BTreeMap::new(),
            })
        }
        other => Err(FixtureError::UnknownFixture(other.to_string())),
    }
}
