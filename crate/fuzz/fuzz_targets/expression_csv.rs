#![no_main]

use libfuzzer_sys::fuzz_target;
use noisynet::coexpress::coexpression_network;
use noisynet::io::read_expression_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(em) = read_expression_csv(text) {
        // downstream construction must fail cleanly, never panic; keep the
        // quadratic correlation pass small
        if em.n_genes() <= 64 && em.n_samples() <= 64 {
            let cols: Vec<usize> = (0..em.n_samples()).collect();
            let _ = coexpression_network(&em, &cols, 0.05);
        }
    }
});
