#![no_main]

use libfuzzer_sys::fuzz_target;
use simulst::prompt::{parse_prompt, plan_from_prompt, SerializedPrompt};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let tokens: Vec<String> = text.split_whitespace().map(String::from).collect();
    let Ok(parsed) = parse_prompt(&tokens, true) else { return };
    if parsed.open.is_none() {
        let mut rebuilt = SerializedPrompt::new(String::new());
        for (s, t) in &parsed.intervals {
            rebuilt.push_interval(s, t);
        }
        assert_eq!(parse_prompt(&rebuilt.tokens, false).expect("rebuilt prompt parses"), parsed);
        let _ = plan_from_prompt(&rebuilt);
    }
});
