//! Conversational prompt construction from aligned sentence pairs.
//!
//! A pair is cut into conversation intervals so that every target word's
//! aligned source words are available in or before its interval. The cuts can
//! then be perturbed (merge and shift) and serialized with `<s> <t> … </t> … </s>`
//! delimiters and a per-token loss mask.

mod pharaoh;
mod serialize;

use std::collections::BTreeSet;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::LanguagePair;

pub use pharaoh::{format_pharaoh, parse_pharaoh};
pub use serialize::{
    escape_word, header, loss_positions, parse_prompt, plan_from_prompt, serialize, unescape_word, ParsedPrompt,
    SerializedPrompt, DELIMITERS, SRC_CLOSE, SRC_OPEN, TGT_CLOSE, TGT_OPEN,
};

pub const DEFAULT_MERGE_PROB: f64 = 0.2;
pub const DEFAULT_SHIFT_PROB: f64 = 0.2;
pub const DEFAULT_MAX_SHIFT: usize = 2;

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("source or target sentence is empty")]
    DegenerateAlignment,
    #[error("alignment pair {source_index}-{target_index} outside a {source_len}x{target_len} sentence pair")]
    AlignmentOutOfRange { source_index: usize, target_index: usize, source_len: usize, target_len: usize },
    #[error("alignment token `{0}` is not of the form i-j")]
    AlignmentSyntax(String),
    #[error("malformed prompt: {0}")]
    MalformedPrompt(String),
    #[error("chunk has no untranslated words")]
    EmptyChunk,
}

/// A sentence pair with word alignments.
///
/// Alignment pairs are zero-based `(source_index, target_index)`, as in Pharaoh files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedSentencePair {
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub alignment: BTreeSet<(usize, usize)>,
    pub context: Vec<String>,
}

impl AlignedSentencePair {
    pub fn new(
        source: Vec<String>,
        target: Vec<String>,
        alignment: impl IntoIterator<Item = (usize, usize)>,
        context: Vec<String>,
    ) -> Result<Self, PromptError> {
        let alignment: BTreeSet<_> = alignment.into_iter().collect();
        if let Some(&(s, t)) = alignment.iter().find(|&&(s, t)| s >= source.len() || t >= target.len()) {
            return Err(PromptError::AlignmentOutOfRange {
                source_index: s,
                target_index: t,
                source_len: source.len(),
                target_len: target.len(),
            });
        }
        Ok(Self { source, target, alignment, context })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub source: Range<usize>,
    pub target: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptPlan {
    pub intervals: Vec<Interval>,
}

impl PromptPlan {
    /// Builds a plan from interior cut points `(source_cut, target_cut)`.
    pub fn from_cuts(cuts: &[(usize, usize)], source_len: usize, target_len: usize) -> Self {
        let mut intervals = Vec::with_capacity(cuts.len() + 1);
        let (mut p, mut q) = (0, 0);
        for &(np, nq) in cuts.iter().chain(std::iter::once(&(source_len, target_len))) {
            intervals.push(Interval { source: p..np, target: q..nq });
            p = np;
            q = nq;
        }
        Self { intervals }
    }

    pub fn cuts(&self) -> Vec<(usize, usize)> {
        self.intervals[..self.intervals.len().saturating_sub(1)]
            .iter()
            .map(|iv| (iv.source.end, iv.target.end))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Spans are non-empty, contiguous, ordered and cover both sentences.
    pub fn is_well_formed(&self, source_len: usize, target_len: usize) -> bool {
        if self.intervals.is_empty() {
            return false;
        }
        let (mut p, mut q) = (0, 0);
        for iv in &self.intervals {
            if iv.source.start != p || iv.target.start != q || iv.source.is_empty() || iv.target.is_empty() {
                return false;
            }
            p = iv.source.end;
            q = iv.target.end;
        }
        p == source_len && q == target_len
    }

    pub fn interval_of_source(&self, index: usize) -> Option<usize> {
        self.intervals.iter().position(|iv| iv.source.contains(&index))
    }

    pub fn interval_of_target(&self, index: usize) -> Option<usize> {
        self.intervals.iter().position(|iv| iv.target.contains(&index))
    }

    /// Every aligned source word sits in the same or an earlier interval than its target word.
    pub fn is_dependency_closed(&self, alignment: &BTreeSet<(usize, usize)>) -> bool {
        alignment.iter().all(|&(s, t)| match (self.interval_of_source(s), self.interval_of_target(t)) {
            (Some(a), Some(b)) => a <= b,
            _ => false,
        })
    }
}

/// For each target prefix length `q`, how many source words it depends on.
fn source_needed(pair: &AlignedSentencePair) -> Vec<usize> {
    let mut need = vec![0; pair.target.len() + 1];
    for &(s, t) in &pair.alignment {
        need[t + 1] = need[t + 1].max(s + 1);
    }
    for q in 1..need.len() {
        need[q] = need[q].max(need[q - 1]);
    }
    need
}

/// Largest number of further cuts placeable after the cut `(p, q)`.
fn max_further_cuts(need: &[usize], source_len: usize, target_len: usize, mut p: usize, q: usize) -> usize {
    let mut count = 0;
    for &n in &need[q + 1..target_len] {
        let np = n.max(p + 1);
        if np < source_len {
            p = np;
            count += 1;
        }
    }
    count
}

/// Finest dependency-respecting partition of a sentence pair.
///
/// Among partitions with the most intervals, target cuts are placed as late
/// as possible (unaligned target words join the earliest legal interval), then
/// source cuts as early as possible (unaligned source words trailing an
/// interval's last needed word move on with the words that follow them).
pub fn segment_alignment(pair: &AlignedSentencePair) -> Result<PromptPlan, PromptError> {
    let (source_len, target_len) = (pair.source.len(), pair.target.len());
    if source_len == 0 || target_len == 0 {
        return Err(PromptError::DegenerateAlignment);
    }
    let need = source_needed(pair);
    let total = max_further_cuts(&need, source_len, target_len, 0, 0);

    let mut cuts = Vec::with_capacity(total);
    let (mut p, mut q) = (0, 0);
    for remaining in (0..total).rev() {
        let (np, nq) = (q + 1..target_len)
            .rev()
            .map(|nq| (need[nq].max(p + 1), nq))
            .find(|&(np, nq)| np < source_len && max_further_cuts(&need, source_len, target_len, np, nq) >= remaining)
            .expect("greedy count guarantees a feasible cut");
        cuts.push((np, nq));
        p = np;
        q = nq;
    }
    Ok(PromptPlan::from_cuts(&cuts, source_len, target_len))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbConfig {
    pub merge_prob: f64,
    pub shift_prob: f64,
    pub max_shift: usize,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self { merge_prob: DEFAULT_MERGE_PROB, shift_prob: DEFAULT_SHIFT_PROB, max_shift: DEFAULT_MAX_SHIFT }
    }
}

/// Randomly merges adjacent intervals and shifts source-side cut points.
///
/// The result keeps spans non-empty, ordered and covering, but may break
/// dependency closure.
pub fn merge_shift(plan: &PromptPlan, seed: u64, perturb: PerturbConfig) -> PromptPlan {
    let Some(last) = plan.intervals.last() else {
        return plan.clone();
    };
    let (source_len, target_len) = (last.source.end, last.target.end);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut cuts: Vec<(usize, usize)> =
        plan.cuts().into_iter().filter(|_| rng.random::<f64>() >= perturb.merge_prob).collect();

    if perturb.max_shift > 0 {
        let max_shift = perturb.max_shift as i64;
        for m in 0..cuts.len() {
            if rng.random::<f64>() >= perturb.shift_prob {
                continue;
            }
            let mut delta = rng.random_range(-max_shift..max_shift);
            if delta >= 0 {
                delta += 1;
            }
            let lo = if m == 0 { 1 } else { cuts[m - 1].0 + 1 };
            let hi = if m + 1 < cuts.len() { cuts[m + 1].0 - 1 } else { source_len - 1 };
            let moved = (cuts[m].0 as i64 + delta).clamp(lo as i64, hi as i64);
            cuts[m].0 = moved as usize;
        }
    }
    PromptPlan::from_cuts(&cuts, source_len, target_len)
}

/// One training prompt: the serialized conversation, its loss mask and the
/// interval spans it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub header: String,
    pub tokens: Vec<String>,
    pub loss_mask: Vec<bool>,
    pub intervals: Vec<Interval>,
}

/// Aligns, perturbs and serializes one sentence pair given as whitespace-tokenized
/// lines plus a Pharaoh alignment line.
pub fn build_prompt(
    source: &str,
    target: &str,
    alignment: &str,
    context: &str,
    language_pair: LanguagePair,
    seed: u64,
    perturb: PerturbConfig,
) -> Result<PromptRecord, PromptError> {
    let split = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
    let pair = AlignedSentencePair::new(split(source), split(target), parse_pharaoh(alignment)?, split(context))?;
    let plan = merge_shift(&segment_alignment(&pair)?, seed, perturb);
    let prompt = serialize(&plan, &pair, language_pair);
    Ok(PromptRecord { header: prompt.header, tokens: prompt.tokens, loss_mask: prompt.loss_mask, intervals: plan.intervals })
}
