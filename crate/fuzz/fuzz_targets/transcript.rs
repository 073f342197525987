#![no_main]

use libfuzzer_sys::fuzz_target;
use simulst::stabilizer::{AsrEngine, AsrRequest, TranscriptAsr};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(words) = TranscriptAsr::parse_jsonl(text) else { return };
    let Ok(mut asr) = TranscriptAsr::new(words.clone(), 0.5, data.len() as u64) else { return };
    let end = words.last().map_or(0, |w| w.end_ms);
    for k in 0..=16u64 {
        let now = end / 16 * k;
        let request = AsrRequest { segment_start_ms: 0, interval_end_ms: now, is_final: k % 4 == 0, context: &[] };
        assert!(asr.transcribe(&request).iter().all(|w| w.end_ms <= now));
    }
});
