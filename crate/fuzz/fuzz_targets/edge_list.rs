#![no_main]

use libfuzzer_sys::fuzz_target;
use noisynet::io::{read_edge_list, write_edge_list};

fuzz_target!(|data: &[u8]| {
    // The parser must never panic, and anything it accepts must survive a
    // write/re-read round trip unchanged.
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(graph) = read_edge_list(text) {
        let rewritten = write_edge_list(&graph);
        let again = read_edge_list(&rewritten).expect("serialized edge list must parse");
        assert_eq!(graph, again);
    }
});
