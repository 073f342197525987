#![no_main]

use libfuzzer_sys::fuzz_target;
use simulst::stabilizer::{parse_trace, simulate_trace, StabilizerConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(entries) = parse_trace(text) else { return };
    let events = simulate_trace(&entries, StabilizerConfig::default());
    assert!(events.windows(2).all(|w| w[0].time_ms <= w[1].time_ms));
});
