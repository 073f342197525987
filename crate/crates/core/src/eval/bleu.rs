//! Corpus BLEU with sacreBLEU-compatible counting.

use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::EvalError;

const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BleuTokenizer {
    /// mteval-v13a style punctuation splitting.
    Word13a,
    /// One token per non-whitespace character.
    Char,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothing {
    #[default]
    None,
    /// Zero-match orders get precision `1 / (2^k * total)`.
    Exp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub score: f64,
    pub precisions: [f64; MAX_ORDER],
    pub counts: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub brevity_penalty: f64,
    pub sys_len: usize,
    pub ref_len: usize,
}

static PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"([\{-~\[-` -&\(-\+:-@/])").unwrap());
static PERIOD_COMMA_AFTER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"([^0-9])([\.,])").unwrap());
static PERIOD_COMMA_BEFORE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"([\.,])([^0-9])").unwrap());
static DIGIT_DASH: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"([0-9])(-)").unwrap());

pub fn tokenize_13a(line: &str) -> Vec<String> {
    let mut text = line.replace("<skipped>", "").replace("-\n", "").replace('\n', " ");
    if text.contains('&') {
        text = text.replace("&quot;", "\"").replace("&amp;", "&").replace("&lt;", "<").replace("&gt;", ">");
    }
    let text = format!(" {text} ");
    let text = PUNCT.replace_all(&text, " $1 ");
    let text = PERIOD_COMMA_AFTER.replace_all(&text, "$1 $2 ");
    let text = PERIOD_COMMA_BEFORE.replace_all(&text, " $1 $2");
    let text = DIGIT_DASH.replace_all(&text, "$1 $2 ");
    text.split_whitespace().map(String::from).collect()
}

pub fn tokenize_chars(line: &str) -> Vec<String> {
    line.chars().filter(|c| !c.is_whitespace()).map(String::from).collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Corpus BLEU with a single reference per sentence.
///
/// Orders with no n-grams anywhere in the hypotheses are left out of the
/// geometric mean, so identical hypothesis and reference corpora always score 100.
pub fn corpus_bleu(
    hypotheses: &[String],
    references: &[String],
    tokenizer: BleuTokenizer,
    smoothing: Smoothing,
) -> Result<BleuScore, EvalError> {
    if hypotheses.len() != references.len() {
        return Err(EvalError::LengthMismatch { hypotheses: hypotheses.len(), references: references.len() });
    }
    let tokenize = match tokenizer {
        BleuTokenizer::Word13a => tokenize_13a,
        BleuTokenizer::Char => tokenize_chars,
    };

    let mut counts = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let (mut sys_len, mut ref_len) = (0, 0);
    for (hyp, reference) in hypotheses.iter().zip(references) {
        let hyp = tokenize(hyp);
        let reference = tokenize(reference);
        sys_len += hyp.len();
        ref_len += reference.len();
        for n in 1..=MAX_ORDER {
            let ref_counts = ngram_counts(&reference, n);
            for (gram, c) in ngram_counts(&hyp, n) {
                counts[n - 1] += c.min(ref_counts.get(gram).copied().unwrap_or(0));
            }
            totals[n - 1] += hyp.len().saturating_sub(n - 1);
        }
    }

    let brevity_penalty = if sys_len >= ref_len {
        1.0
    } else if sys_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / sys_len as f64).exp()
    };

    let mut precisions = [0.0; MAX_ORDER];
    let mut smooth = 1.0;
    let mut order = 0;
    for n in 0..MAX_ORDER {
        if totals[n] == 0 {
            break;
        }
        order = n + 1;
        precisions[n] = if counts[n] > 0 {
            100.0 * counts[n] as f64 / totals[n] as f64
        } else if smoothing == Smoothing::Exp {
            smooth *= 2.0;
            100.0 / (smooth * totals[n] as f64)
        } else {
            0.0
        };
    }

    let score = if sys_len == 0 && ref_len == 0 {
        100.0
    } else if order == 0 || precisions[..order].contains(&0.0) {
        0.0
    } else {
        let log_mean = precisions[..order].iter().map(|p| (p / 100.0).ln()).sum::<f64>() / order as f64;
        (100.0 * brevity_penalty * log_mean.exp()).min(100.0)
    };

    Ok(BleuScore { score, precisions, counts, totals, brevity_penalty, sys_len, ref_len })
}
