#![no_main]

use libfuzzer_sys::fuzz_target;
use simulst::config::PipelineConfig;
use simulst::segmenter::segment_timeline;
use simulst::timeline::AudioTimeline;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(timeline) = AudioTimeline::parse_jsonl(text) else { return };
    if timeline.total_duration_ms > 10_000_000 {
        return;
    }
    let config = PipelineConfig::default().segmenter;
    let segments = segment_timeline(&timeline, config);
    let mut cursor = 0;
    for s in &segments {
        assert_eq!(s.start_ms, cursor);
        assert!(s.end_ms - s.start_ms <= config.max_segment_duration_ms);
        cursor = s.end_ms;
    }
    assert_eq!(cursor, timeline.total_duration_ms);
});
