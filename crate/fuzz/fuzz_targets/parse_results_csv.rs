#![no_main]

use libfuzzer_sys::fuzz_target;
use sicascade::experiment::summarize;
use sicascade::io::{parse_results_csv, write_results_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_results_csv(text) {
        let _ = summarize(&rows);
        if rows.is_empty() {
            return;
        }
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &rows).unwrap();
        let again = parse_results_csv(std::str::from_utf8(&buf).unwrap()).expect("written rows parse");
        assert_eq!(rows, again);
    }
});
