#![no_main]

use libfuzzer_sys::fuzz_target;
use simulst::prompt::{build_prompt, parse_prompt, PerturbConfig};
use simulst::LanguagePair;

// Input: source, target, alignment and context lines separated by newlines.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut lines = text.splitn(4, '\n');
    let (Some(src), Some(tgt), Some(ali)) = (lines.next(), lines.next(), lines.next()) else { return };
    let ctx = lines.next().unwrap_or("");
    if src.len() + tgt.len() > 4096 {
        return;
    }
    let Ok(record) = build_prompt(src, tgt, ali, ctx, LanguagePair::EnDe, data.len() as u64, PerturbConfig::default())
    else {
        return;
    };
    let parsed = parse_prompt(&record.tokens, false).expect("built prompts parse");
    assert_eq!(parsed.intervals.len(), record.intervals.len());
    let ones = record.loss_mask.iter().filter(|&&m| m).count();
    assert_eq!(ones, tgt.split_whitespace().count() + record.intervals.len());
});
