#![no_main]

use libfuzzer_sys::fuzz_target;
use simulst::cleaner::{clean, parse_corpus_jsonl, parse_corpus_tsv, LexicalScorer};
use simulst::LanguagePair;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let samples = parse_corpus_jsonl(text).or_else(|_| parse_corpus_tsv(text, LanguagePair::EnZh));
    let Ok(samples) = samples else { return };
    let once = clean(&samples, &mut LexicalScorer, 0.3);
    let twice = clean(&once.kept, &mut LexicalScorer, 0.3);
    assert_eq!(once.kept, twice.kept);
});
