//! Training-corpus filter.
//!
//! Samples pass four steps in order and the first failing step drops them:
//!
//! 1. short: source or context under 25 characters, counted after `"- "` is
//!    collapsed to a space (repeatedly, so the count is stable on cleaned text);
//! 2. noisy: `...`, brackets or parentheses, or an all-caps source or target;
//! 3. untranslated (en-zh only): the target contains a Latin word, meaning two
//!    or more consecutive ASCII letters;
//! 4. quality: the scorer's estimate falls below the threshold.
//!
//! Kept samples are returned with the `"- "` normalization applied.

use std::io::Write;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::LanguagePair;

pub const MIN_CHARS: usize = 25;
pub const DEFAULT_QE_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSample {
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub context: String,
    pub language_pair: LanguagePair,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ScorerError {
    #[error("scorer failed: {0}")]
    Failed(String),
    #[error("scorer returned {got} scores for {expected} samples")]
    Count { expected: usize, got: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Reference-free translation quality estimate in [0, 1].
pub trait QualityScorer {
    fn score(&mut self, sample: &CorpusSample) -> Result<f64, ScorerError>;

    fn score_batch(&mut self, samples: &[&CorpusSample]) -> Vec<Result<f64, ScorerError>> {
        samples.iter().map(|s| self.score(s)).collect()
    }
}

/// Dice overlap between lowercased source and target word sets. Only useful
/// as a stand-in for a real quality model, or for near-identical language pairs.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalScorer;

impl QualityScorer for LexicalScorer {
    fn score(&mut self, sample: &CorpusSample) -> Result<f64, ScorerError> {
        let bag = |s: &str| {
            s.split_whitespace()
                .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
                .filter(|w| !w.is_empty())
                .collect::<std::collections::BTreeSet<_>>()
        };
        let (a, b) = (bag(&sample.source), bag(&sample.target));
        if a.is_empty() && b.is_empty() {
            return Ok(0.0);
        }
        Ok(2.0 * a.intersection(&b).count() as f64 / (a.len() + b.len()) as f64)
    }
}

/// Runs an external command once per batch. It reads `source<TAB>target`
/// lines on stdin and writes one score per line on stdout.
#[derive(Debug, Clone)]
pub struct ExternalScorer {
    program: String,
    args: Vec<String>,
}

impl ExternalScorer {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self { program: program.into(), args }
    }

    /// Splits a command line on whitespace.
    pub fn from_command_line(command: &str) -> Option<Self> {
        let mut parts = command.split_whitespace().map(String::from);
        let program = parts.next()?;
        Some(Self::new(program, parts.collect()))
    }

    fn run(&self, samples: &[&CorpusSample]) -> Result<Vec<f64>, ScorerError> {
        let failed = |e: std::io::Error| ScorerError::Failed(format!("{}: {e}", self.program));
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(failed)?;
        let input: String = samples
            .iter()
            .map(|s| format!("{}\t{}\n", s.source.replace(['\t', '\n'], " "), s.target.replace(['\t', '\n'], " ")))
            .collect();
        let mut stdin = child.stdin.take().expect("piped stdin");
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let output = child.wait_with_output().map_err(failed)?;
        writer.join().expect("writer thread").map_err(failed)?;
        if !output.status.success() {
            return Err(ScorerError::Failed(format!("{} exited with {}", self.program, output.status)));
        }
        let text = String::from_utf8_lossy(&output.stdout);
        let scores = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse::<f64>().map_err(|e| ScorerError::Failed(format!("bad score `{l}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if scores.len() != samples.len() {
            return Err(ScorerError::Count { expected: samples.len(), got: scores.len() });
        }
        Ok(scores)
    }
}

impl QualityScorer for ExternalScorer {
    fn score(&mut self, sample: &CorpusSample) -> Result<f64, ScorerError> {
        Ok(self.run(&[sample])?[0])
    }

    fn score_batch(&mut self, samples: &[&CorpusSample]) -> Vec<Result<f64, ScorerError>> {
        if samples.is_empty() {
            return Vec::new();
        }
        match self.run(samples) {
            Ok(scores) => scores.into_iter().map(Ok).collect(),
            Err(e) => samples.iter().map(|_| Err(e.clone())).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropCounts {
    pub short: usize,
    pub noisy: usize,
    pub untranslated: usize,
    pub low_quality: usize,
    /// Samples whose score could not be computed; they are dropped.
    pub scorer_failed: usize,
}

impl DropCounts {
    pub fn total(&self) -> usize {
        self.short + self.noisy + self.untranslated + self.low_quality + self.scorer_failed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanReport {
    pub kept: Vec<CorpusSample>,
    pub dropped: DropCounts,
}

/// Collapses `"- "` to a space until none is left.
pub fn normalize_dashes(text: &str) -> String {
    let mut out = text.to_string();
    while out.contains("- ") {
        out = out.replace("- ", " ");
    }
    out
}

/// Text whose letters are all capitals. Uncased letters such as Chinese
/// characters are not capitals, so `"A 计划"` is not all-caps.
pub fn is_all_caps(text: &str) -> bool {
    let mut letters = text.chars().filter(|c| c.is_alphabetic()).peekable();
    letters.peek().is_some() && letters.all(char::is_uppercase)
}

pub fn is_noisy(text: &str) -> bool {
    text.contains("...") || text.contains(['[', ']', '(', ')']) || is_all_caps(text)
}

/// Runs of two or more ASCII letters.
pub fn detect_latin_words(text: &str) -> Vec<&str> {
    let mut found = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        match (c.is_ascii_alphabetic(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s >= 2 {
                    found.push(&text[s..i]);
                }
                start = None;
            }
            _ => {}
        }
    }
    found
}

pub fn clean<Q: QualityScorer + ?Sized>(samples: &[CorpusSample], scorer: &mut Q, threshold: f64) -> CleanReport {
    let mut dropped = DropCounts::default();
    let mut survivors = Vec::new();
    for sample in samples {
        let s = CorpusSample {
            source: normalize_dashes(&sample.source),
            target: normalize_dashes(&sample.target),
            context: normalize_dashes(&sample.context),
            language_pair: sample.language_pair,
        };
        if s.source.chars().count() < MIN_CHARS || s.context.chars().count() < MIN_CHARS {
            dropped.short += 1;
        } else if is_noisy(&s.source) || is_noisy(&s.target) {
            dropped.noisy += 1;
        } else if s.language_pair == LanguagePair::EnZh && !detect_latin_words(&s.target).is_empty() {
            dropped.untranslated += 1;
        } else {
            survivors.push(s);
        }
    }

    let refs: Vec<&CorpusSample> = survivors.iter().collect();
    let scores = scorer.score_batch(&refs);
    let mut kept = Vec::new();
    for (sample, score) in survivors.iter().zip(scores) {
        match score {
            Ok(v) if v >= threshold => kept.push(sample.clone()),
            Ok(_) => dropped.low_quality += 1,
            Err(e) => {
                log::warn!("dropping sample `{}`: {e}", sample.source);
                dropped.scorer_failed += 1;
            }
        }
    }
    CleanReport { kept, dropped }
}

/// JSON-lines corpus, one [`CorpusSample`] per line.
pub fn parse_corpus_jsonl(text: &str) -> Result<Vec<CorpusSample>, CorpusError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| CorpusError::Syntax { line: i + 1, message: e.to_string() }))
        .collect()
}

/// Tab-separated `source<TAB>target<TAB>context` lines (context optional).
pub fn parse_corpus_tsv(text: &str, language_pair: LanguagePair) -> Result<Vec<CorpusSample>, CorpusError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let fields: Vec<&str> = l.split('\t').collect();
            match fields.as_slice() {
                [source, target] | [source, target, ""] => Ok((source, target, "")),
                [source, target, context] => Ok((source, target, *context)),
                _ => Err(CorpusError::Syntax {
                    line: i + 1,
                    message: format!("expected 2 or 3 tab-separated fields, got {}", fields.len()),
                }),
            }
            .map(|(s, t, c)| CorpusSample {
                source: s.to_string(),
                target: t.to_string(),
                context: c.to_string(),
                language_pair,
            })
        })
        .collect()
}

pub fn write_corpus_jsonl(samples: &[CorpusSample]) -> String {
    samples.iter().map(|s| serde_json::to_string(s).expect("samples serialize") + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONTEXT: &str = "This is the previous sentence of the talk.";

    fn sample(source: &str, target: &str, lp: LanguagePair) -> CorpusSample {
        CorpusSample { source: source.into(), target: target.into(), context: CONTEXT.into(), language_pair: lp }
    }

    struct Fixed(f64);

    impl QualityScorer for Fixed {
        fn score(&mut self, _: &CorpusSample) -> Result<f64, ScorerError> {
            Ok(self.0)
        }
    }

    #[test]
    fn short_counts_after_dash_collapse() {
        // 25 characters raw, 23 once "- " becomes " ".
        let s = sample("well - - it was fine ok!!", "gut", LanguagePair::EnDe);
        assert_eq!(s.source.chars().count(), 25);
        let r = clean(&[s], &mut Fixed(1.0), 0.5);
        assert_eq!(r.dropped.short, 1);
    }

    #[test]
    fn noisy_markers() {
        assert!(is_noisy("wait... what"));
        assert!(is_noisy("(laughter) yes"));
        assert!(is_noisy("THANK YOU VERY MUCH!"));
        assert!(!is_noisy("NASA launched a rocket"));
        assert!(!is_noisy("12345"));
        assert!(!is_all_caps("你好"));
        assert!(!is_all_caps("A 计划没有奏效。"));
        assert!(is_all_caps("OK, GO!"));
    }

    #[test]
    fn latin_runs() {
        assert_eq!(detect_latin_words("我喜欢 iPhone 和 A 股"), ["iPhone"]);
        assert!(detect_latin_words("第 3 章 x").is_empty());
        assert_eq!(detect_latin_words("ok"), ["ok"]);
    }

    #[test]
    fn latin_check_only_for_chinese() {
        let de = sample("We met at the conference in Berlin.", "Wir trafen uns in Berlin.", LanguagePair::EnDe);
        let zh = sample("We met at the conference in Berlin.", "我们在 Berlin 的会议上见面。", LanguagePair::EnZh);
        let r = clean(&[de, zh], &mut Fixed(1.0), 0.5);
        assert_eq!(r.kept.len(), 1);
        assert_eq!(r.dropped.untranslated, 1);
    }

    #[test]
    fn threshold_is_inclusive() {
        let s = sample("We met at the conference in Berlin.", "Wir trafen uns.", LanguagePair::EnDe);
        assert_eq!(clean(std::slice::from_ref(&s), &mut Fixed(0.6), 0.6).kept.len(), 1);
        assert_eq!(clean(&[s], &mut Fixed(0.59), 0.6).dropped.low_quality, 1);
    }

    #[test]
    fn cleaning_is_idempotent() {
        let samples = vec![
            sample("so - - this is a long enough line", "so - das ist lang genug", LanguagePair::EnDe),
            sample("short", "kurz", LanguagePair::EnDe),
        ];
        let once = clean(&samples, &mut Fixed(1.0), 0.5).kept;
        let twice = clean(&once, &mut Fixed(1.0), 0.5).kept;
        assert_eq!(once, twice);
        assert!(!once[0].source.contains("- "));
    }

    #[test]
    fn lexical_overlap() {
        let s = sample("the cat sat", "the cat lay", LanguagePair::EnDe);
        assert!((LexicalScorer.score(&s).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tsv_parsing() {
        let c = parse_corpus_tsv("a\tb\nc\td\te\n", LanguagePair::EnZh).unwrap();
        assert_eq!(c[1].context, "e");
        assert!(parse_corpus_tsv("only one field\n", LanguagePair::EnDe).is_err());
    }
}
