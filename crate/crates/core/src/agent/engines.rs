use std::collections::BTreeMap;

use thiserror::Error;

use super::sentences::ends_sentence;
use crate::prompt::{parse_prompt, SerializedPrompt, SRC_CLOSE};

/// A conversational-prompt translation model.
///
/// Given a prompt whose last interval is open (`… <t> source </t>`), produces
/// target tokens terminated by `</s>`.
pub trait TranslationEngine {
    fn generate(&mut self, prompt: &SerializedPrompt) -> Vec<String>;
}

impl<T: TranslationEngine + ?Sized> TranslationEngine for Box<T> {
    fn generate(&mut self, prompt: &SerializedPrompt) -> Vec<String> {
        (**self).generate(prompt)
    }
}

type Interval = (Vec<String>, Vec<String>);

fn open_source(prompt: &SerializedPrompt) -> (Vec<Interval>, Vec<String>) {
    match parse_prompt(&prompt.tokens, true) {
        Ok(parsed) => (parsed.intervals, parsed.open.unwrap_or_default()),
        Err(_) => (Vec::new(), Vec::new()),
    }
}

/// Copies the open interval's source words.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityEngine;

impl TranslationEngine for IdentityEngine {
    fn generate(&mut self, prompt: &SerializedPrompt) -> Vec<String> {
        let (_, mut out) = open_source(prompt);
        out.push(SRC_CLOSE.to_string());
        out
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DictionaryError {
    #[error("line {0}: expected `source<TAB>target`")]
    Syntax(usize),
}

/// Word-for-word translation through a lookup table.
///
/// Lookup is on the lowercased word with surrounding punctuation removed;
/// punctuation is translated separately (when the table has an entry for it)
/// and reattached. Unknown words are copied and words mapped to an empty string
/// are dropped. With `lookahead`, the newest source word is held back until
/// the next action unless it ends the sentence.
#[derive(Debug, Clone, Default)]
pub struct DictionaryEngine {
    map: BTreeMap<String, String>,
    lookahead: bool,
}

impl DictionaryEngine {
    pub fn new(map: BTreeMap<String, String>, lookahead: bool) -> Self {
        Self { map, lookahead }
    }

    /// Parses `source<TAB>target` lines; blank lines and `#` comments are skipped.
    pub fn parse_tsv(text: &str) -> Result<BTreeMap<String, String>, DictionaryError> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (s, t) = line.split_once('\t').ok_or(DictionaryError::Syntax(i + 1))?;
            if s.trim().is_empty() {
                return Err(DictionaryError::Syntax(i + 1));
            }
            map.insert(s.trim().to_lowercase(), t.trim().to_string());
        }
        Ok(map)
    }

    pub fn translate_word(&self, word: &str) -> Option<String> {
        let is_punct = |c: char| !c.is_alphanumeric();
        let core = word.trim_matches(is_punct);
        let lead = &word[..word.find(core).unwrap_or(0)];
        let trail = if core.is_empty() { word } else { &word[lead.len() + core.len()..] };
        let lookup = |s: &str| self.map.get(&s.to_lowercase()).cloned().unwrap_or_else(|| s.to_string());
        let body = if core.is_empty() { String::new() } else { lookup(core) };
        let tail = if trail.is_empty() { String::new() } else { lookup(trail) };
        let out = format!("{lead}{body}{tail}");
        (!out.is_empty()).then_some(out)
    }
}

impl TranslationEngine for DictionaryEngine {
    fn generate(&mut self, prompt: &SerializedPrompt) -> Vec<String> {
        let (closed, open) = open_source(prompt);
        let mut sentence: Vec<String> = closed.into_iter().flat_map(|(s, _)| s).collect();
        let read_before = sentence.len();
        sentence.extend(open);

        let (from, upto) = if self.lookahead {
            let from = read_before.saturating_sub(1);
            let upto = match sentence.last() {
                Some(w) if ends_sentence(w) => sentence.len(),
                _ => sentence.len().saturating_sub(1),
            };
            (from, upto.max(from))
        } else {
            (read_before, sentence.len())
        };
        let mut out: Vec<String> = sentence[from..upto].iter().filter_map(|w| self.translate_word(w)).collect();
        out.push(SRC_CLOSE.to_string());
        out
    }
}

/// Replays a fixed list of outputs, one per action; `</s>` alone once exhausted.
#[derive(Debug, Clone, Default)]
pub struct ScriptedEngine {
    outputs: Vec<Vec<String>>,
    next: usize,
}

impl ScriptedEngine {
    pub fn new(outputs: Vec<Vec<String>>) -> Self {
        Self { outputs, next: 0 }
    }

    /// JSON-lines, one array of output tokens per action.
    pub fn parse_jsonl(text: &str) -> Result<Vec<Vec<String>>, String> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
            .collect()
    }
}

impl TranslationEngine for ScriptedEngine {
    fn generate(&mut self, _prompt: &SerializedPrompt) -> Vec<String> {
        let mut out = self.outputs.get(self.next).cloned().unwrap_or_default();
        self.next += 1;
        if out.last().map(String::as_str) != Some(SRC_CLOSE) {
            out.push(SRC_CLOSE.to_string());
        }
        out
    }
}
