//! Rule-based sentence splitting over a word buffer.
//!
//! A word ends a sentence when, ignoring trailing closing quotes or brackets,
//! it ends in terminal punctuation and is not a known abbreviation or a
//! single-letter initial. The decision depends only on the word itself, so a
//! split never moves as the buffer grows.

use std::ops::Range;

const TERMINALS: [char; 6] = ['.', '!', '?', '。', '！', '？'];
const CLOSERS: [char; 10] = ['"', '\'', '”', '’', ')', ']', '}', '»', '」', '』'];
const ABBREVIATIONS: [&str; 16] = [
    "dr.", "mr.", "mrs.", "ms.", "prof.", "st.", "vs.", "jr.", "sr.", "no.", "fig.", "inc.", "ltd.", "e.g.", "i.e.",
    "u.s.",
];

pub fn is_abbreviation(word: &str) -> bool {
    let lower = word.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    let mut chars = word.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_uppercase())
}

pub fn ends_sentence(word: &str) -> bool {
    let core = word.trim_end_matches(CLOSERS);
    core.ends_with(TERMINALS) && !is_abbreviation(core)
}

/// Splits into sentence spans covering every word; the last span may be an unfinished sentence.
pub fn split_sentences<S: AsRef<str>>(words: &[S]) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start = 0;
    for (i, w) in words.iter().enumerate() {
        if ends_sentence(w.as_ref()) {
            spans.push(start..i + 1);
            start = i + 1;
        }
    }
    if start < words.len() {
        spans.push(start..words.len());
    }
    spans
}
