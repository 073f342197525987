#![no_main]

use libfuzzer_sys::fuzz_target;
use simulst::prompt::{format_pharaoh, parse_pharaoh};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(pairs) = parse_pharaoh(text) else { return };
    assert_eq!(parse_pharaoh(&format_pharaoh(pairs.iter().copied())).expect("formatted alignments parse"), pairs);
});
