#![no_main]

use libfuzzer_sys::fuzz_target;
use simulst::eval::{stream_laal, Unit};
use simulst::events::{parse_event_log, replay_log, write_event_log};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(events) = parse_event_log(text) else { return };
    let written = write_event_log(&events);
    assert_eq!(parse_event_log(&written).expect("written logs parse"), events);
    if let Ok(log) = replay_log(&events) {
        let _ = stream_laal(&log, Unit::Word);
        let _ = stream_laal(&log, Unit::Char);
    }
});
