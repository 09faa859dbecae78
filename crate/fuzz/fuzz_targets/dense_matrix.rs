#![no_main]

use libfuzzer_sys::fuzz_target;
use noisynet::graph::{count_triangles, count_two_stars};
use noisynet::io::{read_dense_csv, write_dense_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(graph) = read_dense_csv(text) {
        let rewritten = write_dense_csv(&graph);
        let again = read_dense_csv(&rewritten).expect("serialized matrix must parse");
        assert_eq!(graph, again);
        // every accepted graph satisfies the triad inequality
        assert!(count_two_stars(&graph) >= 3 * count_triangles(&graph));
    }
});
