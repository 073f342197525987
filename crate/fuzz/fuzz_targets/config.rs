#![no_main]

use libfuzzer_sys::fuzz_target;
use simulst::config::validate_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = validate_config(text) {
        assert_eq!(validate_config(&config.to_toml()).expect("serialized config validates"), config);
    }
});
