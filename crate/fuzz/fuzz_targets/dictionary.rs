#![no_main]

use libfuzzer_sys::fuzz_target;
use simulst::agent::DictionaryEngine;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(map) = DictionaryEngine::parse_tsv(text) else { return };
    let engine = DictionaryEngine::new(map.clone(), true);
    for word in map.keys().chain(map.values()) {
        let _ = engine.translate_word(word);
    }
    for word in text.split_whitespace() {
        let _ = engine.translate_word(word);
    }
});
