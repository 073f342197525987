use serde::{Deserialize, Serialize};

use super::{EvalError, Unit};
use crate::events::{EmissionLog, EmittedToken};

/// Length of a text in units: whitespace-separated words or non-whitespace characters.
pub fn unit_len(text: &str, unit: Unit) -> usize {
    match unit {
        Unit::Word => text.split_whitespace().count(),
        Unit::Char => text.chars().filter(|c| !c.is_whitespace()).count(),
    }
}

/// Emission time of every output unit, relative to `origin_ms`.
///
/// In char mode each character of a token is emitted at the token's time.
pub fn expand_units(tokens: &[EmittedToken], origin_ms: u64, unit: Unit) -> Vec<f64> {
    tokens
        .iter()
        .flat_map(|t| {
            let n = match unit {
                Unit::Word => 1,
                Unit::Char => unit_len(&t.text, Unit::Char),
            };
            std::iter::repeat_n(t.emit_time_ms as f64 - origin_ms as f64, n)
        })
        .collect()
}

/// LAAL over per-unit emission times.
///
/// With `N` output units, `d_i = t_i - (i-1) * source_ms / max(N, ref_len)`;
/// the mean is taken over `i = 1..=tau`, where `tau` is the first unit emitted
/// at or after the end of the source (or `N`).
pub fn laal_delays(times: &[f64], source_ms: f64, ref_len: usize) -> Result<f64, EvalError> {
    if times.is_empty() {
        return Err(EvalError::EmptyOutput);
    }
    let n = times.len();
    let rate = source_ms / n.max(ref_len) as f64;
    let tau = times.iter().position(|&t| t >= source_ms).map_or(n, |i| i + 1);
    let sum: f64 = times[..tau].iter().enumerate().map(|(i, &t)| t - i as f64 * rate).sum();
    Ok(sum / tau as f64)
}

pub fn laal(tokens: &[EmittedToken], source_ms: u64, ref_len: usize, unit: Unit) -> Result<f64, EvalError> {
    laal_delays(&expand_units(tokens, 0, unit), source_ms as f64, ref_len)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamLatency {
    pub mean_ms: f64,
    /// `None` for sentences that produced no output; they are left out of the mean.
    pub per_sentence: Vec<Option<f64>>,
}

pub fn stream_laal(log: &EmissionLog, unit: Unit) -> Result<StreamLatency, EvalError> {
    let mut cursor = 0;
    for (k, s) in log.sentences.iter().enumerate() {
        if s.tokens.start != cursor || s.tokens.end < s.tokens.start {
            return Err(EvalError::AlignmentGap(format!("sentence {k} starts at token {}, expected {cursor}", s.tokens.start)));
        }
        cursor = s.tokens.end;
    }
    if cursor != log.tokens.len() {
        return Err(EvalError::AlignmentGap(format!("{} trailing tokens outside any sentence", log.tokens.len() - cursor)));
    }

    let per_sentence: Vec<Option<f64>> = log
        .sentences
        .iter()
        .map(|s| {
            let times = expand_units(&log.tokens[s.tokens.clone()], s.source_start_ms, unit);
            let source_ms = s.source_end_ms.saturating_sub(s.source_start_ms) as f64;
            laal_delays(&times, source_ms, unit_len(&s.reference, unit)).ok()
        })
        .collect();
    let scored: Vec<f64> = per_sentence.iter().flatten().copied().collect();
    if scored.is_empty() {
        return Err(EvalError::EmptyOutput);
    }
    let mean_ms = scored.iter().sum::<f64>() / scored.len() as f64;
    Ok(StreamLatency { mean_ms, per_sentence })
}
