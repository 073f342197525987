use serde::{Deserialize, Serialize};

use super::{AlignedSentencePair, Interval, PromptError, PromptPlan};
use crate::lang::LanguagePair;

pub const SRC_OPEN: &str = "<s>";
pub const TGT_OPEN: &str = "<t>";
pub const TGT_CLOSE: &str = "</t>";
pub const SRC_CLOSE: &str = "</s>";
pub const DELIMITERS: [&str; 4] = [SRC_OPEN, TGT_OPEN, TGT_CLOSE, SRC_CLOSE];

const ESCAPE: char = '\\';

/// Prefixes words that would read as delimiters (or already start with the escape char).
pub fn escape_word(word: &str) -> String {
    if DELIMITERS.contains(&word) || word.starts_with(ESCAPE) {
        format!("{ESCAPE}{word}")
    } else {
        word.to_string()
    }
}

pub fn unescape_word(token: &str) -> String {
    token.strip_prefix(ESCAPE).unwrap_or(token).to_string()
}

/// Instruction header. The context line is omitted when there is no context.
pub fn header(context: &[String], language_pair: LanguagePair) -> String {
    let instruction = format!(
        "Now translate the following sentence from {} to {} Assistant:",
        language_pair.source_name(),
        language_pair.target_name()
    );
    if context.is_empty() {
        instruction
    } else {
        format!("Use the following sentence as context: {}\n{instruction}", context.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerializedPrompt {
    pub header: String,
    pub tokens: Vec<String>,
    pub loss_mask: Vec<bool>,
}

impl SerializedPrompt {
    pub fn new(header: String) -> Self {
        Self { header, tokens: Vec::new(), loss_mask: Vec::new() }
    }

    /// Appends a closed interval `<s> <t> source </t> target </s>`.
    pub fn push_interval(&mut self, source: &[String], target: &[String]) {
        self.open_interval(source);
        self.tokens.extend(target.iter().map(|w| escape_word(w)));
        self.tokens.push(SRC_CLOSE.to_string());
        self.loss_mask.extend(std::iter::repeat_n(true, target.len() + 1));
    }

    /// Appends `<s> <t> source </t>`, leaving the interval open for generation.
    pub fn open_interval(&mut self, source: &[String]) {
        self.tokens.push(SRC_OPEN.to_string());
        self.tokens.push(TGT_OPEN.to_string());
        self.tokens.extend(source.iter().map(|w| escape_word(w)));
        self.tokens.push(TGT_CLOSE.to_string());
        self.loss_mask.extend(std::iter::repeat_n(false, source.len() + 3));
    }

    pub fn to_text(&self) -> String {
        format!("{}\n{}", self.header, self.tokens.join(" "))
    }
}

pub fn serialize(plan: &PromptPlan, pair: &AlignedSentencePair, language_pair: LanguagePair) -> SerializedPrompt {
    let mut prompt = SerializedPrompt::new(header(&pair.context, language_pair));
    for iv in &plan.intervals {
        prompt.push_interval(&pair.source[iv.source.clone()], &pair.target[iv.target.clone()]);
    }
    prompt
}

/// Intervals recovered from delimited tokens, with words unescaped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPrompt {
    pub intervals: Vec<(Vec<String>, Vec<String>)>,
    /// Trailing `<s> <t> source </t>` awaiting generation.
    pub open: Option<Vec<String>>,
}

impl ParsedPrompt {
    pub fn is_closed(&self) -> bool {
        self.open.is_none()
    }
}

enum State {
    Between,
    AfterSrcOpen,
    Source,
    Target,
}

/// Parses delimited tokens. An unterminated final interval is allowed only
/// when `allow_open`, and only if it ends right after `</t>`.
pub fn parse_prompt(tokens: &[String], allow_open: bool) -> Result<ParsedPrompt, PromptError> {
    let malformed = |at: usize, what: &str| PromptError::MalformedPrompt(format!("token {at}: {what}"));
    let mut intervals = Vec::new();
    let mut state = State::Between;
    let (mut source, mut target) = (Vec::new(), Vec::new());
    for (i, tok) in tokens.iter().enumerate() {
        let tok = tok.as_str();
        state = match (state, tok) {
            (State::Between, SRC_OPEN) => State::AfterSrcOpen,
            (State::Between, _) => return Err(malformed(i, "expected <s>")),
            (State::AfterSrcOpen, TGT_OPEN) => State::Source,
            (State::AfterSrcOpen, _) => return Err(malformed(i, "expected <t>")),
            (State::Source, TGT_CLOSE) => State::Target,
            (State::Source, t) if DELIMITERS.contains(&t) => return Err(malformed(i, "expected </t>")),
            (State::Source, t) => {
                source.push(unescape_word(t));
                State::Source
            }
            (State::Target, SRC_CLOSE) => {
                intervals.push((std::mem::take(&mut source), std::mem::take(&mut target)));
                State::Between
            }
            (State::Target, t) if DELIMITERS.contains(&t) => return Err(malformed(i, "expected </s>")),
            (State::Target, t) => {
                target.push(unescape_word(t));
                State::Target
            }
        };
    }
    match state {
        State::Between => Ok(ParsedPrompt { intervals, open: None }),
        State::Target if allow_open && target.is_empty() => Ok(ParsedPrompt { intervals, open: Some(source) }),
        _ => Err(PromptError::MalformedPrompt("unterminated interval: missing </s>".into())),
    }
}

/// Closed token ranges `(s_k, e_k)` carrying loss: from just after each
/// `</t>` through the matching `</s>`.
pub fn loss_positions(prompt: &SerializedPrompt) -> Result<Vec<(usize, usize)>, PromptError> {
    parse_prompt(&prompt.tokens, false)?;
    let mut ranges = Vec::new();
    let mut start = None;
    for (i, tok) in prompt.tokens.iter().enumerate() {
        match tok.as_str() {
            TGT_CLOSE => start = Some(i + 1),
            SRC_CLOSE => ranges.push((start.take().expect("parsed prompt pairs delimiters"), i)),
            _ => {}
        }
    }
    Ok(ranges)
}

/// Rebuilds interval spans from a closed prompt.
pub fn plan_from_prompt(prompt: &SerializedPrompt) -> Result<PromptPlan, PromptError> {
    let parsed = parse_prompt(&prompt.tokens, false)?;
    let (mut p, mut q) = (0, 0);
    let intervals = parsed
        .intervals
        .iter()
        .map(|(s, t)| {
            let iv = Interval { source: p..p + s.len(), target: q..q + t.len() };
            p += s.len();
            q += t.len();
            iv
        })
        .collect();
    Ok(PromptPlan { intervals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::segment_alignment;

    fn w(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn single_interval_serialization_and_mask() {
        let pair = AlignedSentencePair::new(w("hello"), w("hallo"), [(0, 0)], vec![]).unwrap();
        let plan = segment_alignment(&pair).unwrap();
        let prompt = serialize(&plan, &pair, LanguagePair::EnDe);
        assert_eq!(prompt.tokens.join(" "), "<s> <t> hello </t> hallo </s>");
        assert_eq!(prompt.loss_mask, vec![false, false, false, false, true, true]);
        assert_eq!(loss_positions(&prompt).unwrap(), vec![(4, 5)]);
        assert!(!prompt.header.contains("context"));
    }

    #[test]
    fn two_intervals_interleave_with_context() {
        let pair = AlignedSentencePair::new(w("s1 s2 s3"), w("t1 t2"), [(0, 0), (2, 1)], w("c1 c2")).unwrap();
        let plan = segment_alignment(&pair).unwrap();
        let prompt = serialize(&plan, &pair, LanguagePair::EnDe);
        assert_eq!(prompt.tokens.join(" "), "<s> <t> s1 </t> t1 </s> <s> <t> s2 s3 </t> t2 </s>");
        assert_eq!(
            prompt.to_text(),
            "Use the following sentence as context: c1 c2\n\
             Now translate the following sentence from English to German Assistant:\n\
             <s> <t> s1 </t> t1 </s> <s> <t> s2 s3 </t> t2 </s>"
        );
        assert_eq!(loss_positions(&prompt).unwrap(), vec![(4, 5), (11, 12)]);
    }

    #[test]
    fn delimiter_words_are_escaped_and_round_trip() {
        let pair = AlignedSentencePair::new(w("</s> \\x"), w("<t>"), [(0, 0)], vec![]).unwrap();
        let plan = segment_alignment(&pair).unwrap();
        let prompt = serialize(&plan, &pair, LanguagePair::EnZh);
        assert_eq!(prompt.tokens, w("<s> <t> \\</s> \\\\x </t> \\<t> </s>"));
        let parsed = parse_prompt(&prompt.tokens, false).unwrap();
        assert_eq!(parsed.intervals, vec![(w("</s> \\x"), w("<t>"))]);
        assert_eq!(plan_from_prompt(&prompt).unwrap(), plan);
    }

    #[test]
    fn missing_close_is_malformed() {
        let tokens = w("<s> <t> hello </t> hallo");
        let prompt = SerializedPrompt { header: String::new(), tokens, loss_mask: vec![false; 5] };
        assert!(matches!(loss_positions(&prompt), Err(PromptError::MalformedPrompt(_))));
        assert!(parse_prompt(&w("<s> hello"), true).is_err());
        assert!(parse_prompt(&w("stray <s> <t> a </t> b </s>"), false).is_err());
    }

    #[test]
    fn open_interval_parses_when_allowed() {
        let mut prompt = SerializedPrompt::new(String::new());
        prompt.push_interval(&w("a b"), &w("x"));
        prompt.open_interval(&w("c"));
        assert!(parse_prompt(&prompt.tokens, false).is_err());
        let parsed = parse_prompt(&prompt.tokens, true).unwrap();
        assert_eq!(parsed.open, Some(w("c")));
        assert_eq!(parsed.intervals.len(), 1);
    }
}
