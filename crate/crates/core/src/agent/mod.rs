//! Simultaneous translation agent.
//!
//! Committed transcript words are buffered and split into sentences. A
//! translation action fires on the oldest sentence while either its
//! untranslated word count reaches the minimum chunk size (MCS) or the buffer
//! holds more than one sentence. Each action extends the sentence's
//! conversational prompt with `<s> <t> chunk </t>`, asks the engine to
//! continue until `</s>`, and records the output as a closed interval. A
//! finished sentence leaves the buffer and becomes the single-slot memory bank
//! used as prompt context for the next one.

mod engines;
mod sentences;

use serde::{Deserialize, Serialize};

use crate::events::{EventKind, PipelineEvent, SentenceCompleted, TranslationToken};
use crate::lang::LanguagePair;
use crate::prompt::{header, PromptError, SerializedPrompt, SRC_CLOSE};
use crate::stabilizer::StableWord;

pub use engines::{DictionaryEngine, DictionaryError, IdentityEngine, ScriptedEngine, TranslationEngine};
pub use sentences::{ends_sentence, is_abbreviation, split_sentences};

pub const DEFAULT_GENERATION_BUDGET: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemoryBankMode {
    /// Cache the completed source sentence.
    Source,
    /// Cache the completed sentence's translation.
    Translation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub min_chunk_size_words: usize,
    pub language_pair: LanguagePair,
    /// Require strictly more than MCS untranslated words instead of at least MCS.
    pub strict_chunk_trigger: bool,
    pub memory_bank: MemoryBankMode,
    pub generation_budget: usize,
}

impl AgentConfig {
    pub fn new(min_chunk_size_words: usize, language_pair: LanguagePair) -> Self {
        Self {
            min_chunk_size_words,
            language_pair,
            strict_chunk_trigger: false,
            memory_bank: MemoryBankMode::Source,
            generation_budget: DEFAULT_GENERATION_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BufferedWord {
    pub text: String,
    pub source_end_ms: u64,
    pub translated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trigger {
    /// Untranslated words in the current sentence reached the minimum chunk size.
    ChunkSize,
    /// The buffer holds more than one sentence.
    SentenceBoundary,
    /// End of stream.
    Flush,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationAction {
    pub action: usize,
    pub sentence: usize,
    pub trigger: Trigger,
    pub source: Vec<String>,
    pub output: Vec<String>,
    pub prompt: SerializedPrompt,
    pub source_end_ms: u64,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AgentAction {
    Translate(TranslationAction),
    CompleteSentence(SentenceCompleted),
}

impl AgentAction {
    pub fn to_events(&self, time_ms: u64) -> Vec<PipelineEvent> {
        match self {
            AgentAction::Translate(a) => a
                .output
                .iter()
                .map(|token| {
                    PipelineEvent::new(
                        time_ms,
                        EventKind::TranslationEmitted(TranslationToken {
                            sentence: a.sentence,
                            action: a.action,
                            token: token.clone(),
                            source_end_ms: a.source_end_ms,
                        }),
                    )
                })
                .collect(),
            AgentAction::CompleteSentence(s) => {
                vec![PipelineEvent::new(time_ms, EventKind::SentenceCompleted(s.clone()))]
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Agent {
    config: AgentConfig,
    buffer: Vec<BufferedWord>,
    running_translation: Vec<String>,
    sentence_translation: Vec<String>,
    memory_bank: Option<Vec<String>>,
    live_prompt: SerializedPrompt,
    sentence_index: usize,
    action_index: usize,
    sentence_start_ms: u64,
}

impl Agent {
    pub fn new(config: AgentConfig) -> Self {
        Self {
            config,
            buffer: Vec::new(),
            running_translation: Vec::new(),
            sentence_translation: Vec::new(),
            memory_bank: None,
            live_prompt: SerializedPrompt::new(header(&[], config.language_pair)),
            sentence_index: 0,
            action_index: 0,
            sentence_start_ms: 0,
        }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn buffer(&self) -> &[BufferedWord] {
        &self.buffer
    }

    pub fn running_translation(&self) -> &[String] {
        &self.running_translation
    }

    pub fn memory_bank(&self) -> Option<&[String]> {
        self.memory_bank.as_deref()
    }

    pub fn live_prompt(&self) -> &SerializedPrompt {
        &self.live_prompt
    }

    /// Buffers newly committed words and runs the translation loop.
    pub fn ingest<E: TranslationEngine + ?Sized>(&mut self, words: &[StableWord], engine: &mut E) -> Vec<AgentAction> {
        self.buffer.extend(words.iter().map(|w| BufferedWord {
            text: w.text.clone(),
            source_end_ms: w.source_end_ms,
            translated: false,
        }));

        let mut actions = Vec::new();
        loop {
            let spans = self.sentence_spans();
            let Some(first) = spans.first().cloned() else { break };
            let multiple = spans.len() > 1;
            let untranslated = self.untranslated_in(&first);
            let mcs = self.config.min_chunk_size_words;
            let chunk_ready =
                if self.config.strict_chunk_trigger { untranslated > mcs } else { untranslated >= mcs.max(1) };
            if !chunk_ready && !multiple {
                break;
            }
            if untranslated > 0 {
                let trigger = if chunk_ready { Trigger::ChunkSize } else { Trigger::SentenceBoundary };
                actions.push(AgentAction::Translate(self.translate(trigger, engine)));
            }
            if multiple {
                actions.push(AgentAction::CompleteSentence(self.complete_sentence(first.end)));
            }
        }
        actions
    }

    /// Translates and completes everything left in the buffer.
    pub fn flush<E: TranslationEngine + ?Sized>(&mut self, engine: &mut E) -> Vec<AgentAction> {
        let mut actions = Vec::new();
        while let Some(first) = self.sentence_spans().first().cloned() {
            if self.untranslated_in(&first) > 0 {
                actions.push(AgentAction::Translate(self.translate(Trigger::Flush, engine)));
            }
            actions.push(AgentAction::CompleteSentence(self.complete_sentence(first.end)));
        }
        actions
    }

    /// The live prompt extended with an open interval over the oldest
    /// sentence's untranslated words.
    pub fn build_incremental_prompt(&self) -> Result<SerializedPrompt, PromptError> {
        let chunk = self.pending_chunk();
        if chunk.is_empty() {
            return Err(PromptError::EmptyChunk);
        }
        let mut prompt = self.live_prompt.clone();
        prompt.open_interval(&chunk);
        Ok(prompt)
    }

    /// Removes the oldest sentence (the first `end` buffered words), caches it
    /// in the memory bank and resets the prompt.
    pub fn complete_sentence(&mut self, end: usize) -> SentenceCompleted {
        let end = end.min(self.buffer.len());
        let words: Vec<BufferedWord> = self.buffer.drain(..end).collect();
        let source: Vec<String> = words.iter().map(|w| w.text.clone()).collect();
        let translation = std::mem::take(&mut self.sentence_translation);
        let source_end_ms = words.last().map_or(self.sentence_start_ms, |w| w.source_end_ms).max(self.sentence_start_ms);

        let completed = SentenceCompleted {
            sentence: self.sentence_index,
            source_start_ms: self.sentence_start_ms,
            source_end_ms,
            source: source.clone(),
            translation: translation.clone(),
        };
        let bank = match self.config.memory_bank {
            MemoryBankMode::Source => source,
            MemoryBankMode::Translation => translation,
        };
        self.live_prompt = SerializedPrompt::new(header(&bank, self.config.language_pair));
        self.memory_bank = Some(bank);
        self.sentence_index += 1;
        self.sentence_start_ms = source_end_ms;
        completed
    }

    fn sentence_spans(&self) -> Vec<std::ops::Range<usize>> {
        let texts: Vec<&str> = self.buffer.iter().map(|w| w.text.as_str()).collect();
        split_sentences(&texts)
    }

    fn untranslated_in(&self, span: &std::ops::Range<usize>) -> usize {
        self.buffer[span.clone()].iter().filter(|w| !w.translated).count()
    }

    fn pending_chunk(&self) -> Vec<String> {
        let Some(first) = self.sentence_spans().into_iter().next() else {
            return Vec::new();
        };
        self.buffer[first].iter().filter(|w| !w.translated).map(|w| w.text.clone()).collect()
    }

    fn translate<E: TranslationEngine + ?Sized>(&mut self, trigger: Trigger, engine: &mut E) -> TranslationAction {
        let prompt = self.build_incremental_prompt().expect("caller checked for untranslated words");
        let first = self.sentence_spans().into_iter().next().expect("non-empty buffer");
        let chunk_words: Vec<&mut BufferedWord> =
            self.buffer[first].iter_mut().filter(|w| !w.translated).collect();
        let source_end_ms = chunk_words.iter().map(|w| w.source_end_ms).max().unwrap_or(0);
        let source: Vec<String> = chunk_words.iter().map(|w| w.text.clone()).collect();
        for w in chunk_words {
            w.translated = true;
        }

        let budget = self.config.generation_budget;
        let generated = engine.generate(&prompt);
        let mut output = Vec::new();
        let mut terminated = false;
        for token in generated {
            if token == SRC_CLOSE {
                terminated = true;
                break;
            }
            if output.len() == budget {
                break;
            }
            output.push(token);
        }
        if !terminated {
            log::warn!("action {}: engine did not emit </s> within {budget} tokens; closing interval", self.action_index);
        }

        self.live_prompt.push_interval(&source, &output);
        self.running_translation.extend(output.iter().cloned());
        self.sentence_translation.extend(output.iter().cloned());
        let action = TranslationAction {
            action: self.action_index,
            sentence: self.sentence_index,
            trigger,
            source,
            output,
            prompt,
            source_end_ms,
            budget_exhausted: !terminated,
        };
        self.action_index += 1;
        action
    }
}
