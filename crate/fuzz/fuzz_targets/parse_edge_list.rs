#![no_main]

use libfuzzer_sys::fuzz_target;
use sicascade::io::{read_edge_list, write_edge_list};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = read_edge_list(text) {
        let mut buf = Vec::new();
        write_edge_list(&mut buf, &g).unwrap();
        let again = read_edge_list(std::str::from_utf8(&buf).unwrap()).expect("written edge list parses");
        assert_eq!(g.edges(), again.edges());
    }
});
