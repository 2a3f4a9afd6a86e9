#![no_main]

use libfuzzer_sys::fuzz_target;
use sicascade::io::{format_rounds, parse_rounds};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rounds) = parse_rounds(text) {
        if rounds.is_empty() {
            return;
        }
        let again = parse_rounds(&format_rounds(&rounds)).expect("formatted rounds parse");
        assert_eq!(rounds, again);
    }
});
